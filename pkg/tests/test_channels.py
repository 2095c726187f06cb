"""Kraus channels, Choi matrices, and process tomography tests."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from qss3.channels import (
    QuantumChannel,
    Reconstruction,
    TomographyRecord,
    apply,
    bloch_vector,
    choi_of,
    default_probes,
    depolarizing,
    identity_channel,
    process_fidelity,
    reconstruct,
    sampled_record,
)
from qss3.qcore import DensityMatrix, PureState, fidelity, ket

S2 = 1 / np.sqrt(2)
PLUS = PureState(np.array([S2, S2])).to_density()


def random_channel(rng):
    # Stinespring draw: a Haar-ish isometry from C^2 into C^2 x C^4
    g = rng.normal(size=(8, 2)) + 1j * rng.normal(size=(8, 2))
    q, _ = np.linalg.qr(g)
    return QuantumChannel([q[2 * i : 2 * i + 2, :] for i in range(4)])


def random_density(rng):
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m))


# ---------------------------------------------------------------- construction


def test_channel_requires_trace_preservation():
    with pytest.raises(ValueError):
        QuantumChannel([np.array([[0.5, 0], [0, 0.5]])])
    with pytest.raises(ValueError):
        QuantumChannel([])


def test_channel_dimensions():
    ch = identity_channel()
    assert ch.d_in == 2 and ch.d_out == 2
    assert identity_channel(2).d_in == 4


def test_depolarizing_parameter_range():
    for lam in (-0.1, 1.1):
        with pytest.raises(ValueError):
            depolarizing(lam)


# ---------------------------------------------------------------- application


def test_apply_identity_is_identity():
    rho = random_density(np.random.default_rng(31))
    out = apply(identity_channel(), rho)
    assert_allclose(out.matrix, rho.matrix, atol=1e-12)


def test_apply_full_depolarizing_scrambles_everything():
    ch = depolarizing(0.75)
    for rho in (ket("0").to_density(), PLUS):
        assert_allclose(apply(ch, rho).matrix, np.eye(2) / 2, atol=1e-12)


def test_apply_zero_strength_is_identity():
    rho = random_density(np.random.default_rng(32))
    assert_allclose(apply(depolarizing(0.0), rho).matrix, rho.matrix, atol=1e-12)


def test_apply_dimension_mismatch():
    with pytest.raises(ValueError):
        apply(identity_channel(), ket("00").to_density())


def test_apply_accepts_pure_states():
    out = apply(depolarizing(0.75), ket("0"))
    assert_allclose(out.matrix, np.eye(2) / 2, atol=1e-12)


# ---------------------------------------------------------------- Choi matrices


def test_choi_of_identity_is_maximally_entangled():
    phi = np.array([S2, 0, 0, S2])
    assert_allclose(choi_of(identity_channel()).matrix, np.outer(phi, phi), atol=1e-12)


def test_choi_of_full_depolarizing_is_maximally_mixed():
    assert_allclose(choi_of(depolarizing(0.75)).matrix, np.eye(4) / 4, atol=1e-12)


def test_choi_of_phase_flip():
    z = QuantumChannel([np.diag([1.0, -1.0])])
    phi_minus = np.array([S2, 0, 0, -S2])
    assert_allclose(choi_of(z).matrix, np.outer(phi_minus, phi_minus), atol=1e-12)


def test_choi_is_a_valid_state():
    rng = np.random.default_rng(33)
    for _ in range(10):
        j = choi_of(random_channel(rng))
        assert isinstance(j, DensityMatrix)
        assert np.linalg.eigvalsh(j.matrix).min() > -1e-10


# ---------------------------------------------------------------- fidelity


def test_process_fidelity_values():
    assert process_fidelity(identity_channel(), identity_channel()) == pytest.approx(1.0, abs=1e-10)
    f = process_fidelity(identity_channel(), depolarizing(0.75))
    assert f == pytest.approx(0.25, abs=1e-10)


def test_process_fidelity_symmetric():
    rng = np.random.default_rng(34)
    a, b = random_channel(rng), random_channel(rng)
    assert process_fidelity(a, b) == pytest.approx(process_fidelity(b, a), abs=1e-10)


# ---------------------------------------------------------------- tomography


def exact_record(ch):
    probes = default_probes()
    return TomographyRecord(probes, tuple(apply(ch, p) for p in probes))


def test_record_validation():
    probes = default_probes()
    with pytest.raises(ValueError):
        TomographyRecord(probes, probes[:3])
    with pytest.raises(ValueError):
        TomographyRecord((), ())


def test_reconstruct_identity_and_depolarizing():
    for ch in (identity_channel(), depolarizing(0.75), depolarizing(0.3)):
        rec = reconstruct(exact_record(ch))
        assert rec.physical and not rec.projected
        assert process_fidelity(rec.channel, ch) == pytest.approx(1.0, abs=1e-10)


def test_reconstruct_random_channels():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        ch = random_channel(rng)
        rec = reconstruct(exact_record(ch))
        assert fidelity(choi_of(rec.channel), choi_of(ch)) >= 1 - 1e-8


def test_reconstruct_rejects_degenerate_probes():
    probes = (ket("0").to_density(),) * 4
    record = TomographyRecord(probes, probes)
    with pytest.raises(ValueError):
        reconstruct(record)


def test_reconstruct_flags_unphysical_map():
    # the transpose map is positive but not completely positive
    probes = default_probes()
    outputs = tuple(DensityMatrix(p.matrix.T.copy()) for p in probes)
    rec = reconstruct(TomographyRecord(probes, outputs))
    assert not rec.physical
    assert rec.min_choi_eigenvalue == pytest.approx(-0.5, abs=1e-6)
    assert rec.projected
    assert rec.channel is not None  # projected back onto the physical set

    raw = reconstruct(TomographyRecord(probes, outputs), project_if_needed=False)
    assert raw.channel is None and not raw.physical


def test_reconstruct_from_finite_statistics():
    rng = np.random.default_rng(55)
    channels = [identity_channel(), depolarizing(0.3), depolarizing(0.75)]
    channels += [random_channel(rng) for _ in range(3)]
    for ch in channels:
        rec = reconstruct(sampled_record(ch, 10**4, seed=123))
        assert rec.channel is not None
        assert process_fidelity(rec.channel, ch) >= 0.98


def test_sampled_record_deterministic():
    a = sampled_record(depolarizing(0.3), 2000, seed=7)
    b = sampled_record(depolarizing(0.3), 2000, seed=7)
    for x, y in zip(a.measured_outputs, b.measured_outputs):
        assert_allclose(x.matrix, y.matrix, atol=0)


# ---------------------------------------------------------------- Bloch picture


@pytest.mark.parametrize("lam", [0.0, 0.25, 0.75, 1.0])
def test_depolarizing_contracts_bloch_sphere(lam):
    rng = np.random.default_rng(35)
    ch = depolarizing(lam)
    scale = 1 - 4 * lam / 3
    for _ in range(5):
        rho = random_density(rng)
        r_in = bloch_vector(rho)
        r_out = bloch_vector(apply(ch, rho))
        assert_allclose(r_out, scale * r_in, atol=1e-10)


def test_bloch_vector_cardinal_states():
    assert_allclose(bloch_vector(ket("0").to_density()), [0, 0, 1], atol=1e-12)
    assert_allclose(bloch_vector(PLUS), [1, 0, 0], atol=1e-12)
    assert_allclose(bloch_vector(DensityMatrix(np.eye(2) / 2)), [0, 0, 0], atol=1e-12)
