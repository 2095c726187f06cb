"""The five-qubit distance-3 code: logical basis, erasure of known positions,
Knill-Laflamme verification, and constructive recovery synthesis.

Logical amplitudes follow the fixed sign table below (normalization 1/sqrt(8));
qubit 0 is the leftmost symbol of a basis label like |01101>.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Sequence, Tuple, Union

import numpy as np

from .channels import QuantumChannel
from .qcore import (
    ATOL_CONSTRUCT,
    ATOL_DERIVED,
    DensityMatrix,
    Operator,
    PureState,
    partial_trace,
)

__all__ = [
    "LogicalBasis",
    "ErasureSpec",
    "logical_basis",
    "encode5",
    "erase",
    "erasure_branches",
    "pauli_operator",
    "pauli_weight",
    "pauli_labels_up_to_weight",
    "random_weight3_labels",
    "KLResult",
    "kl_check",
    "synthesize_recovery",
]

N_QUBITS = 5

# (sign, basis label) pairs for the two logical states.
_ZERO_TERMS = (
    (-1, "00000"), (+1, "01111"), (-1, "10011"), (+1, "11100"),
    (+1, "00110"), (+1, "01001"), (+1, "10101"), (+1, "11010"),
)
_ONE_TERMS = (
    (-1, "11111"), (+1, "10000"), (+1, "01100"), (-1, "00011"),
    (+1, "11001"), (+1, "10110"), (-1, "01010"), (-1, "00101"),
)


@dataclass(frozen=True, eq=False)
class LogicalBasis:
    """The logical |0_L>, |1_L> pair; orthonormal five-qubit states."""

    zero_L: PureState
    one_L: PureState

    def __post_init__(self) -> None:
        for s in (self.zero_L, self.one_L):
            if s.n_qubits != N_QUBITS:
                raise ValueError("logical states live on five qubits")
        overlap = abs(self.zero_L.overlap(self.one_L))
        if overlap > ATOL_CONSTRUCT:
            raise ValueError(f"logical states are not orthogonal (|<0|1>| = {overlap:.3e})")


def _state_from_terms(terms) -> PureState:
    amps = np.zeros(2**N_QUBITS, dtype=complex)
    for sign, label in terms:
        amps[int(label, 2)] = sign
    return PureState(amps / np.sqrt(8.0))


def logical_basis() -> LogicalBasis:
    return LogicalBasis(_state_from_terms(_ZERO_TERMS), _state_from_terms(_ONE_TERMS))


@dataclass(frozen=True)
class ErasureSpec:
    """Known erased positions; at most two, the code's erasure distance."""

    erased: frozenset

    def __init__(self, erased: Iterable[int] = ()) -> None:
        positions = frozenset(int(q) for q in erased)
        if any(q < 0 or q >= N_QUBITS for q in positions):
            raise ValueError(f"erased positions {sorted(positions)} out of range 0..4")
        if len(positions) > 2:
            raise ValueError(f"{len(positions)} erasures exceed the code distance (max 2)")
        object.__setattr__(self, "erased", positions)

    @property
    def kept(self) -> Tuple[int, ...]:
        return tuple(q for q in range(N_QUBITS) if q not in self.erased)


def encode5(alpha: complex, beta: complex) -> PureState:
    """Encode alpha|0> + beta|1> into the code space.

    The input must already be normalized; this does not silently rescale.
    """
    norm_sq = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(norm_sq - 1.0) > ATOL_DERIVED:
        raise ValueError(f"|alpha|^2+|beta|^2 = {norm_sq!r}, expected 1")
    basis = logical_basis()
    return PureState(alpha * basis.zero_L.amplitudes + beta * basis.one_L.amplitudes)


def erase(code_state: PureState, spec: ErasureSpec) -> DensityMatrix:
    """Lose the listed qubits: partial trace over the erased positions."""
    if code_state.n_qubits != N_QUBITS:
        raise ValueError("erase expects a five-qubit state")
    if not isinstance(spec, ErasureSpec):
        spec = ErasureSpec(spec)
    return partial_trace(code_state.to_density(), spec.kept)


def erasure_branches(code_state: PureState, spec: ErasureSpec) -> List[tuple]:
    """Conditional decomposition of an erasure.

    Returns (bits, probability, state) per computational value of the erased
    qubits, where `state` is the renormalized conditional state of the kept
    qubits (None for zero-probability values). The weighted mixture of the
    branches equals erase(code_state, spec).
    """
    if not isinstance(spec, ErasureSpec):
        spec = ErasureSpec(spec)
    erased = sorted(spec.erased)
    kept = list(spec.kept)
    tens = code_state.amplitudes.reshape((2,) * N_QUBITS)
    tens = tens.transpose(erased + kept).reshape(2 ** len(erased), 2 ** len(kept))
    branches = []
    for k in range(tens.shape[0]):
        bits = format(k, f"0{max(1, len(erased))}b") if erased else ""
        w = tens[k]
        prob = float(np.real(np.vdot(w, w)))
        if prob < 1e-12:
            branches.append((bits, prob, None))
        else:
            branches.append((bits, prob, PureState(w / np.sqrt(prob))))
    return branches


_PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_operator(label: str) -> Operator:
    """Five-qubit Pauli product from a label like "XIZIY"."""
    if len(label) != N_QUBITS or any(c not in _PAULI_1Q for c in label):
        raise ValueError(f"label must be five characters over IXYZ, got {label!r}")
    mat = np.array([[1.0 + 0j]])
    for c in label:
        mat = np.kron(mat, _PAULI_1Q[c])
    return Operator(mat, unitary=True)


def pauli_weight(label: str) -> int:
    return sum(1 for c in label if c != "I")


def pauli_labels_up_to_weight(max_weight: int) -> List[str]:
    """All five-qubit Pauli labels of weight <= max_weight, deterministic order."""
    labels = []
    for w in range(max_weight + 1):
        for positions in itertools.combinations(range(N_QUBITS), w):
            for letters in itertools.product("XYZ", repeat=w):
                chars = ["I"] * N_QUBITS
                for pos, letter in zip(positions, letters):
                    chars[pos] = letter
                labels.append("".join(chars))
    return labels


def random_weight3_labels(count: int, seed: int) -> List[str]:
    """Distinct uniformly drawn weight-3 Pauli labels."""
    all3 = [l for l in pauli_labels_up_to_weight(3) if pauli_weight(l) == 3]
    if count > len(all3):
        raise ValueError(f"only {len(all3)} weight-3 Paulis exist")
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(all3), size=count, replace=False)
    return [all3[i] for i in picks]


class KLResult(NamedTuple):
    passes: bool
    coefficients: np.ndarray
    worst_violation: float


def _error_matrix(e) -> np.ndarray:
    if isinstance(e, Operator):
        return e.matrix
    if isinstance(e, str):
        return pauli_operator(e).matrix
    return np.asarray(e, dtype=complex)


def kl_check(basis: LogicalBasis, error_set: Sequence, atol: float = ATOL_DERIVED) -> KLResult:
    """Check <j_L| E_b† E_a |i_L> = C_ba delta_ij over all pairs of the set.

    Passes iff the two cross blocks vanish and the two diagonal blocks agree,
    all within atol. The coefficient matrix C is the mean diagonal block.
    """
    mats = [_error_matrix(e) for e in error_set]
    if not mats:
        raise ValueError("error set is empty")
    if any(m.shape != (2**N_QUBITS, 2**N_QUBITS) for m in mats):
        raise ValueError("errors must act on five qubits")
    v0 = np.stack([m @ basis.zero_L.amplitudes for m in mats])
    v1 = np.stack([m @ basis.one_L.amplitudes for m in mats])
    m00 = v0.conj() @ v0.T
    m01 = v0.conj() @ v1.T
    m10 = v1.conj() @ v0.T
    m11 = v1.conj() @ v1.T
    worst = max(
        float(np.max(np.abs(m01))),
        float(np.max(np.abs(m10))),
        float(np.max(np.abs(m00 - m11))),
    )
    coeff = (m00 + m11) / 2.0
    coeff = (coeff + coeff.conj().T) / 2.0
    return KLResult(worst <= atol, coeff, worst)


def _erasure_kraus(spec: ErasureSpec) -> List[np.ndarray]:
    """Partial-inner-product operators A_k mapping the logical qubit to the
    kept register, one per computational value of the erased positions."""
    basis = logical_basis()
    V = np.column_stack([basis.zero_L.amplitudes, basis.one_L.amplitudes])
    erased = sorted(spec.erased)
    kept = list(spec.kept)
    tens = V.reshape((2,) * N_QUBITS + (2,))
    tens = tens.transpose(erased + kept + [N_QUBITS])
    blocks = tens.reshape(2 ** len(erased), 2 ** len(kept), 2)
    return [blocks[k] for k in range(blocks.shape[0])]


def synthesize_recovery(spec: ErasureSpec) -> QuantumChannel:
    """Build the channel that maps the kept qubits back to the secret qubit.

    Diagonalizing the Gram matrix of the erasure's partial-inner-product
    operators yields one isometry per syndrome subspace; the recovery applies
    each isometry adjoint, plus a completion on the orthogonal complement.
    Exactness rests on the code correcting operators supported on the erased
    positions, which the construction verifies as it runs.
    """
    if not isinstance(spec, ErasureSpec):
        spec = ErasureSpec(spec)
    ops = _erasure_kraus(spec)
    m = len(ops)
    gram = np.empty((m, m), dtype=complex)
    for j in range(m):
        for k in range(m):
            prod = ops[j].conj().T @ ops[k]
            gram[j, k] = np.trace(prod) / 2.0
            dev = float(np.max(np.abs(prod - gram[j, k] * np.eye(2))))
            if dev > 1e-9:
                raise RuntimeError(
                    f"erasure operators violate the correctability condition "
                    f"(pair {j},{k} deviates by {dev:.3e})"
                )
    vals, vecs = np.linalg.eigh(gram)
    d_kept = ops[0].shape[0]
    kraus: List[np.ndarray] = []
    range_projector = np.zeros((d_kept, d_kept), dtype=complex)
    for l in range(m):
        if vals[l] <= 1e-12:
            continue
        b = sum(vecs[j, l] * ops[j] for j in range(m))
        iso = b / np.sqrt(vals[l])
        kraus.append(iso.conj().T)
        range_projector += iso @ iso.conj().T
    if not kraus:
        raise RuntimeError("no syndrome subspace carries weight")
    perp = np.eye(d_kept) - range_projector
    pvals, pvecs = np.linalg.eigh(perp)
    e0 = np.array([1.0, 0.0], dtype=complex)
    for w, v in zip(pvals, pvecs.T):
        if w > 0.5:
            kraus.append(np.outer(e0, v.conj()))
    return QuantumChannel(tuple(kraus))
