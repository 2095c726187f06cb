"""Gate matrices, the two-qubit entangler, and Bell-basis measurement."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from qss3.channels import QuantumChannel, process_fidelity
from qss3.gates import (
    BELL_LABELS,
    GateSpec,
    bell_states,
    bsm,
    controlled,
    cxz_decomposed,
    gate,
)
from qss3.qcore import PureState, apply_unitary, fidelity, ket, tensor

S2 = 1 / np.sqrt(2)


def random_pure(rng, n):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return PureState(v / np.linalg.norm(v))


# ---------------------------------------------------------------- fixed gates


def test_rotation_at_pi_is_z():
    assert_allclose(gate(GateSpec("R", theta=np.pi)).matrix, np.diag([1, -1]), atol=1e-12)


def test_rotation_phases_excited_amplitude_only():
    theta = 0.37
    r = gate(GateSpec("R", theta=theta)).matrix
    assert_allclose(r @ np.array([1, 0]), [1, 0], atol=1e-15)
    assert_allclose(r @ np.array([0, 1]), [0, np.exp(1j * theta)], atol=1e-15)


def test_hadamard_squares_to_identity():
    h = gate("H").matrix
    assert_allclose(h @ h, np.eye(2), atol=1e-12)


@pytest.mark.parametrize("name", ["I", "X", "Y", "Z", "H"])
def test_involutive_gates(name):
    m = gate(name).matrix
    assert_allclose(m @ m, np.eye(2), atol=1e-12)
    assert_allclose(m @ m.conj().T, np.eye(2), atol=1e-12)


def test_gate_spec_validation():
    with pytest.raises(ValueError):
        gate(GateSpec("R"))  # rotation needs an angle
    with pytest.raises(ValueError):
        gate(GateSpec("X", theta=1.0))
    with pytest.raises(ValueError):
        gate("Q")


def test_controlled_wraps_single_qubit_gate():
    cz = controlled(gate("Z"))
    assert_allclose(cz.matrix, np.diag([1, 1, 1, -1]), atol=1e-15)
    cnot = gate("CNOT")
    assert_allclose(cnot.matrix, controlled(gate("X")).matrix, atol=1e-15)


# ---------------------------------------------------------------- entangler


def test_entangler_on_active_control():
    alpha, beta = 0.6, 0.8
    state = tensor(ket("1"), PureState(np.array([alpha, beta])))
    out = apply_unitary(state, gate("CXZ"), [0, 1])
    expected = tensor(ket("1"), PureState(np.array([-beta, alpha])))
    assert_allclose(out.amplitudes, expected.amplitudes, atol=1e-12)


def test_entangler_on_idle_control():
    rng = np.random.default_rng(21)
    target = random_pure(rng, 1)
    state = tensor(ket("0"), target)
    out = apply_unitary(state, gate("CXZ"), [0, 1])
    assert_allclose(out.amplitudes, state.amplitudes, atol=1e-12)


def test_entangler_decomposition_matches_exactly():
    direct = gate("CXZ").matrix
    built = cxz_decomposed().matrix
    assert np.max(np.abs(direct - built)) < 1e-12
    f = process_fidelity(QuantumChannel([direct]), QuantumChannel([built]))
    assert f == pytest.approx(1.0, abs=1e-10)


def test_decomposed_entangler_behaviour():
    u = cxz_decomposed()
    rng = np.random.default_rng(22)
    target = random_pure(rng, 1)
    idle = apply_unitary(tensor(ket("0"), target), u, [0, 1])
    assert fidelity(idle, tensor(ket("0"), target)) == pytest.approx(1.0, abs=1e-12)
    flipped = apply_unitary(tensor(ket("1"), ket("0")), u, [0, 1])
    assert fidelity(flipped, tensor(ket("1"), ket("1"))) == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------- Bell basis


def test_bell_states_orthonormal_and_complete():
    states = bell_states()
    assert tuple(states) == BELL_LABELS
    vecs = [states[k].amplitudes for k in BELL_LABELS]
    gram = np.array([[np.vdot(u, v) for v in vecs] for u in vecs])
    assert_allclose(gram, np.eye(4), atol=1e-12)
    total = sum(np.outer(v, v.conj()) for v in vecs)
    assert_allclose(total, np.eye(4), atol=1e-12)


def test_bell_state_amplitudes():
    states = bell_states()
    assert_allclose(states["phi+"].amplitudes, [S2, 0, 0, S2], atol=1e-15)
    assert_allclose(states["phi-"].amplitudes, [S2, 0, 0, -S2], atol=1e-15)
    assert_allclose(states["psi+"].amplitudes, [0, S2, S2, 0], atol=1e-15)
    assert_allclose(states["psi-"].amplitudes, [0, S2, -S2, 0], atol=1e-15)


def test_bsm_on_bell_state_is_deterministic():
    outcomes = bsm(bell_states()["phi+"])
    probs = {o.label: o.probability for o in outcomes}
    assert probs["phi+"] == pytest.approx(1.0, abs=1e-12)
    for label in ("phi-", "psi+", "psi-"):
        assert probs[label] == pytest.approx(0.0, abs=1e-12)
    live = [o for o in outcomes if o.post_state is not None]
    assert len(live) == 1 and live[0].label == "phi+"


def test_bsm_on_product_state_splits_in_phi_sector():
    outcomes = {o.label: o for o in bsm(ket("00"))}
    assert outcomes["phi+"].probability == pytest.approx(0.5, abs=1e-12)
    assert outcomes["phi-"].probability == pytest.approx(0.5, abs=1e-12)
    assert outcomes["psi+"].probability == pytest.approx(0.0, abs=1e-12)
    assert outcomes["psi-"].post_state is None


def test_bsm_reconstruction_branch():
    # measuring shares B and C of the (0,0) branch leaves Alice holding a
    # unitary transform of the secret, fixed by the Bell outcome
    from qss3.qss import Secret, encode_secret

    alpha, beta = 0.28, np.sqrt(1 - 0.28**2)
    branch = encode_secret(Secret(alpha, beta)).branch(0, 0)
    outcomes = {o.label: o for o in bsm(branch, targets=(1, 2))}
    assert outcomes["phi+"].probability == pytest.approx(0.5, abs=1e-12)
    assert outcomes["phi-"].probability == pytest.approx(0.5, abs=1e-12)

    def alice_matches(label, amps):
        expected = tensor(PureState(np.array(amps, dtype=complex)), bell_states()[label])
        return fidelity(outcomes[label].post_state, expected)

    assert alice_matches("phi+", [beta, -alpha]) == pytest.approx(1.0, abs=1e-10)
    assert alice_matches("phi-", [-alpha, -beta]) == pytest.approx(1.0, abs=1e-10)


def test_bsm_probabilities_form_distribution():
    rng = np.random.default_rng(23)
    for _ in range(1000):
        state = random_pure(rng, 2)
        outcomes = bsm(state)
        probs = np.array([o.probability for o in outcomes])
        assert np.all(probs >= -1e-12)
        assert probs.sum() == pytest.approx(1.0, abs=1e-10)


def test_bsm_target_validation():
    with pytest.raises(ValueError):
        bsm(ket("00"), targets=(0,))
    with pytest.raises(ValueError):
        bsm(ket("00"), targets=(0, 2))
