"""Five-qubit code tests: encoding, erasure branches, error checks, recovery."""

import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose

from qss3.code5 import (
    ErasureSpec,
    encode5,
    erase,
    erasure_branches,
    kl_check,
    logical_basis,
    pauli_labels_up_to_weight,
    pauli_operator,
    pauli_weight,
    random_weight3_labels,
    synthesize_recovery,
)
from qss3.channels import apply
from qss3.qcore import DensityMatrix, PureState, apply_unitary, fidelity, ket

S8 = 1 / np.sqrt(8)
S2 = 1 / np.sqrt(2)


def three_qubit_pair_states():
    # the eight (|xyz> +/- |x'y'z'>)/sqrt(2) states the erasure branches land on
    def pair(a, b, sign):
        v = np.zeros(8, dtype=complex)
        v[int(a, 2)] = S2
        v[int(b, 2)] = sign * S2
        return PureState(v)

    return {
        1: pair("000", "111", +1),
        2: pair("000", "111", -1),
        3: pair("100", "011", +1),
        4: pair("100", "011", -1),
        5: pair("010", "101", +1),
        6: pair("010", "101", -1),
        7: pair("110", "001", +1),
        8: pair("110", "001", -1),
    }


# ---------------------------------------------------------------- logical states


def test_logical_basis_pinned_amplitudes():
    basis = logical_basis()
    assert basis.zero_L.amplitudes[0b00000] == pytest.approx(-S8, abs=1e-12)
    assert basis.one_L.amplitudes[0b10000] == pytest.approx(S8, abs=1e-12)


def test_logical_basis_structure():
    basis = logical_basis()
    for state in (basis.zero_L, basis.one_L):
        mags = np.abs(state.amplitudes)
        assert np.count_nonzero(mags > 1e-12) == 8
        assert_allclose(mags[mags > 1e-12], S8, atol=1e-12)
    assert abs(np.vdot(basis.zero_L.amplitudes, basis.one_L.amplitudes)) < 1e-12


def test_encode5_is_linear():
    basis = logical_basis()
    alpha, beta = 0.6, 0.8j
    direct = encode5(alpha, beta)
    combined = alpha * basis.zero_L.amplitudes + beta * basis.one_L.amplitudes
    assert_allclose(direct.amplitudes, combined, atol=1e-12)


def test_encode5_superposition():
    plus_L = encode5(S2, S2)
    basis = logical_basis()
    manual = PureState((basis.zero_L.amplitudes + basis.one_L.amplitudes) * S2)
    assert fidelity(plus_L, manual) == pytest.approx(1.0, abs=1e-12)


def test_encode5_requires_normalized_secret():
    with pytest.raises(ValueError):
        encode5(1.0, 1.0)


# ---------------------------------------------------------------- erasure


def test_erasure_spec_validation():
    with pytest.raises(ValueError):
        ErasureSpec((0, 1, 2))
    with pytest.raises(ValueError):
        ErasureSpec((5,))
    assert ErasureSpec((1, 1)).erased == frozenset({1})  # duplicates collapse
    assert ErasureSpec((3, 4)).kept == (0, 1, 2)


def test_erase_nothing_keeps_state_pure():
    psi = encode5(0.6, 0.8)
    rho = erase(psi, ErasureSpec(()))
    assert_allclose(rho.matrix, np.outer(psi.amplitudes, psi.amplitudes.conj()), atol=1e-12)


@pytest.mark.parametrize(
    "secret,mapping",
    [
        ((1, 0), {"00": 2, "01": 5, "10": 7, "11": 4}),
        ((0, 1), {"00": 3, "01": 8, "10": 6, "11": 1}),
    ],
)
def test_erasure_branches_land_on_pair_states(secret, mapping):
    pairs = three_qubit_pair_states()
    branches = erasure_branches(encode5(*secret), ErasureSpec((3, 4)))
    assert len(branches) == 4
    for bits, prob, state in branches:
        assert prob == pytest.approx(0.25, abs=1e-12)
        target = pairs[mapping[bits]]
        overlap = abs(np.vdot(target.amplitudes, state.amplitudes))
        assert overlap == pytest.approx(1.0, abs=1e-10)


def test_erasure_branches_reassemble_marginal():
    psi = encode5(0.48, np.sqrt(1 - 0.48**2) * 1j)
    spec = ErasureSpec((1, 3))
    rho = erase(psi, spec)
    mix = sum(
        p * np.outer(s.amplitudes, s.amplitudes.conj())
        for _, p, s in erasure_branches(psi, spec)
    )
    assert_allclose(rho.matrix, mix, atol=1e-12)
    assert abs(np.trace(rho.matrix) - 1) < 1e-12


def test_erasing_last_two_qubits_matches_sharing_state():
    # losing qubits 3 and 4 leaves the dealer state up to one local rotation
    from qss3.qss import Secret, encode_secret, relating_rotation

    for alpha, beta in [(1, 0), (S2, S2), (0.6, 0.8j)]:
        left = erase(encode5(alpha, beta), ErasureSpec((3, 4)))
        shared = encode_secret(Secret(alpha, beta)).to_density()
        rotated = apply_unitary(shared, relating_rotation(), [0, 1, 2])
        assert np.max(np.abs(left.matrix - rotated.matrix)) < 1e-10


# ---------------------------------------------------------------- Pauli helpers


def test_pauli_label_enumeration():
    assert len(pauli_labels_up_to_weight(1)) == 16
    assert len(pauli_labels_up_to_weight(2)) == 106
    for label in pauli_labels_up_to_weight(2):
        assert len(label) == 5
        assert pauli_weight(label) <= 2


def test_pauli_operator_and_weight():
    op = pauli_operator("IXIII")
    expected = np.kron(np.kron(np.eye(2), np.array([[0, 1], [1, 0]])), np.eye(8))
    assert_allclose(op.matrix, expected, atol=1e-15)
    assert pauli_weight("IIIII") == 0
    assert pauli_weight("XZIIY") == 3
    with pytest.raises(ValueError):
        pauli_operator("ABCDE")
    with pytest.raises(ValueError):
        pauli_operator("XX")


def test_random_weight3_labels():
    labels = random_weight3_labels(20, seed=99)
    assert len(labels) == 20
    assert all(pauli_weight(lab) == 3 for lab in labels)
    assert labels == random_weight3_labels(20, seed=99)
    assert labels != random_weight3_labels(20, seed=100)


# ---------------------------------------------------------------- error criteria


def test_identity_alone_passes():
    res = kl_check(logical_basis(), ["IIIII"])
    assert res.passes
    assert_allclose(res.coefficients, [[1.0]], atol=1e-12)
    assert res.worst_violation < 1e-12


def test_single_qubit_errors_pass_pairwise():
    res = kl_check(logical_basis(), pauli_labels_up_to_weight(1))
    assert res.passes
    assert res.worst_violation < 1e-10
    assert res.coefficients.shape == (16, 16)
    assert np.max(np.abs(res.coefficients - res.coefficients.conj().T)) < 1e-12


def test_all_error_products_pass_individually():
    # products of two correctable errors, checked one at a time against identity
    basis = logical_basis()
    worst = 0.0
    for label in pauli_labels_up_to_weight(2):
        res = kl_check(basis, ["IIIII", label])
        assert res.passes, label
        worst = max(worst, res.worst_violation)
    assert worst < 1e-10


def test_weight_two_set_is_not_pairwise_correctable():
    # distance three: products of two weight-2 errors can reach weight 4
    res = kl_check(logical_basis(), pauli_labels_up_to_weight(2))
    assert not res.passes
    assert res.worst_violation > 0.1


def test_named_weight_three_error_fails():
    errors = pauli_labels_up_to_weight(2) + ["XXXII"]
    res = kl_check(logical_basis(), errors)
    assert not res.passes
    assert res.worst_violation > 1e-3


def test_random_weight_three_errors_fail():
    basis = logical_basis()
    companions = pauli_labels_up_to_weight(2)
    for label in random_weight3_labels(10, seed=41):
        res = kl_check(basis, companions + [label])
        assert not res.passes, label
        assert res.worst_violation >= 1e-3


# ---------------------------------------------------------------- recovery


def test_recovery_from_standard_erasure():
    ch = synthesize_recovery(ErasureSpec((3, 4)))
    assert ch.d_out == 2
    psi = ket("0")
    out = apply(ch, erase(encode5(1, 0), ErasureSpec((3, 4))))
    assert fidelity(out, psi) == pytest.approx(1.0, abs=1e-10)


def test_recovery_from_first_pair_erasure():
    plus = PureState(np.array([S2, S2]))
    out = apply(
        synthesize_recovery(ErasureSpec((0, 1))),
        erase(encode5(S2, S2), ErasureSpec((0, 1))),
    )
    assert fidelity(out, plus) == pytest.approx(1.0, abs=1e-10)


def test_recovery_with_no_erasure_is_decoding():
    ch = synthesize_recovery(ErasureSpec(()))
    out = apply(ch, erase(encode5(0.6, 0.8), ErasureSpec(())))
    assert fidelity(out, PureState(np.array([0.6, 0.8]))) == pytest.approx(1.0, abs=1e-10)


def test_recovery_across_patterns_and_secrets():
    rng = np.random.default_rng(77)
    specs = [ErasureSpec((k,)) for k in range(5)]
    specs += [ErasureSpec(p) for p in itertools.combinations(range(5), 2)]
    for spec in specs:
        ch = synthesize_recovery(spec)
        for _ in range(3):
            v = rng.normal(size=2) + 1j * rng.normal(size=2)
            v /= np.linalg.norm(v)
            out = apply(ch, erase(encode5(*v), spec))
            assert fidelity(out, PureState(v)) >= 1 - 1e-9
