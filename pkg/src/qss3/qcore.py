"""Dense complex linear algebra for small multi-qubit systems.

States, operators and mixtures are immutable wrappers around numpy arrays.
Qubit 0 is always the leftmost tensor factor, i.e. the most significant bit
of a computational basis index; every indexing decision in the package goes
through the helpers here so the convention lives in exactly one place.

All functions are pure and return new values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np

#: Tolerance for construction-time invariants (norms, hermiticity, traces).
ATOL_CONSTRUCT = 1e-12
#: Tolerance for derived quantities (reduced states, closed-loop identities).
ATOL_DERIVED = 1e-10
#: Largest composite system `tensor` will build.
MAX_QUBITS = 8

__all__ = [
    "ATOL_CONSTRUCT",
    "ATOL_DERIVED",
    "MAX_QUBITS",
    "CapacityError",
    "PureState",
    "DensityMatrix",
    "Ensemble",
    "Operator",
    "ket",
    "basis_state",
    "tensor",
    "partial_trace",
    "fidelity",
    "trace_distance",
    "apply_unitary",
    "project",
    "expectation",
]


class CapacityError(ValueError):
    """A composite would exceed the configured qubit budget."""


def _qubit_count(dim: int, what: str) -> int:
    n = int(dim).bit_length() - 1
    if dim < 2 or 2**n != dim:
        raise ValueError(f"{what} dimension {dim} is not a power of two >= 2")
    return n


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit-norm amplitude vector over the n-qubit computational basis."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        _qubit_count(amps.size, "state")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > ATOL_CONSTRUCT:
            raise ValueError(f"state norm {norm!r} deviates from 1 beyond {ATOL_CONSTRUCT}")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @property
    def n_qubits(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def to_density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def overlap(self, other: "PureState") -> complex:
        """Inner product <self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite, trace-one matrix on n qubits."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        mat = np.array(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {mat.shape}")
        _qubit_count(mat.shape[0], "density matrix")
        herm_dev = float(np.max(np.abs(mat - mat.conj().T)))
        if herm_dev > ATOL_CONSTRUCT:
            raise ValueError(f"matrix is not Hermitian (max deviation {herm_dev:.3e})")
        tr_dev = abs(complex(np.trace(mat)) - 1.0)
        if tr_dev > ATOL_CONSTRUCT:
            raise ValueError(f"trace deviates from 1 by {tr_dev:.3e}")
        min_eig = float(np.linalg.eigvalsh(mat)[0])
        if min_eig < -ATOL_DERIVED:
            raise ValueError(f"matrix has negative eigenvalue {min_eig:.3e}")
        object.__setattr__(self, "matrix", _frozen(mat))

    @property
    def n_qubits(self) -> int:
        return self.matrix.shape[0].bit_length() - 1

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Weighted mixture of pure states on a common register."""

    entries: tuple

    def __post_init__(self) -> None:
        entries = tuple((float(w), s) for w, s in self.entries)
        if not entries:
            raise ValueError("ensemble needs at least one entry")
        n = entries[0][1].n_qubits
        total = 0.0
        for w, s in entries:
            if not isinstance(s, PureState):
                raise TypeError("ensemble entries must be (weight, PureState)")
            if s.n_qubits != n:
                raise ValueError("ensemble states must share a register size")
            if w < -ATOL_CONSTRUCT or w > 1.0 + ATOL_CONSTRUCT:
                raise ValueError(f"weight {w!r} outside [0, 1]")
            total += w
        if abs(total - 1.0) > ATOL_CONSTRUCT:
            raise ValueError(f"weights sum to {total!r}, expected 1")
        object.__setattr__(self, "entries", entries)

    @property
    def n_qubits(self) -> int:
        return self.entries[0][1].n_qubits

    def to_density(self) -> DensityMatrix:
        dim = self.entries[0][1].dim
        mat = np.zeros((dim, dim), dtype=complex)
        for w, s in self.entries:
            mat += w * np.outer(s.amplitudes, s.amplitudes.conj())
        return DensityMatrix(mat)


@dataclass(frozen=True, eq=False)
class Operator:
    """Square matrix acting on n qubits, optionally flagged unitary/projector."""

    matrix: np.ndarray
    unitary: bool = False
    projector: bool = False

    def __post_init__(self) -> None:
        mat = np.array(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"operator must be square, got shape {mat.shape}")
        _qubit_count(mat.shape[0], "operator")
        if self.unitary:
            dev = float(np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[0]))))
            if dev > ATOL_CONSTRUCT:
                raise ValueError(f"flagged unitary but U†U deviates from I by {dev:.3e}")
        if self.projector:
            dev = max(
                float(np.max(np.abs(mat @ mat - mat))),
                float(np.max(np.abs(mat - mat.conj().T))),
            )
            if dev > ATOL_CONSTRUCT:
                raise ValueError(f"flagged projector but P²=P=P† deviates by {dev:.3e}")
        object.__setattr__(self, "matrix", _frozen(mat))

    @property
    def n_qubits(self) -> int:
        return self.matrix.shape[0].bit_length() - 1

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def adjoint(self) -> "Operator":
        return Operator(self.matrix.conj().T, unitary=self.unitary, projector=self.projector)


def ket(bits: str) -> PureState:
    """Computational basis state from a bit string, e.g. ket("01")."""
    if not bits or any(b not in "01" for b in bits):
        raise ValueError(f"bit string must be nonempty over {{0,1}}, got {bits!r}")
    amps = np.zeros(2 ** len(bits), dtype=complex)
    amps[int(bits, 2)] = 1.0
    return PureState(amps)


def basis_state(index: int, n_qubits: int) -> PureState:
    """Computational basis state |index> on n_qubits."""
    dim = 2**n_qubits
    if not 0 <= index < dim:
        raise ValueError(f"index {index} out of range for {n_qubits} qubits")
    amps = np.zeros(dim, dtype=complex)
    amps[index] = 1.0
    return PureState(amps)


def tensor(a, b):
    """Kronecker composition of two values of the same kind.

    Qubit indices of `b` are shifted after those of `a`; raises CapacityError
    if the composite would exceed MAX_QUBITS.
    """
    if type(a) is not type(b):
        raise TypeError(f"tensor requires matching kinds, got {type(a).__name__} and {type(b).__name__}")
    n = a.n_qubits + b.n_qubits
    if n > MAX_QUBITS:
        raise CapacityError(f"tensor would create {n} qubits, limit is {MAX_QUBITS}")
    if isinstance(a, PureState):
        return PureState(np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, DensityMatrix):
        return DensityMatrix(np.kron(a.matrix, b.matrix))
    if isinstance(a, Operator):
        return Operator(
            np.kron(a.matrix, b.matrix),
            unitary=a.unitary and b.unitary,
            projector=a.projector and b.projector,
        )
    raise TypeError(f"unsupported kind {type(a).__name__}")


def _ptrace_raw(mat: np.ndarray, n: int, keep: Sequence[int]) -> np.ndarray:
    """Partial trace on a raw 2^n x 2^n matrix, keeping `keep` (ascending)."""
    tens = mat.reshape((2,) * (2 * n))
    # traced qubits share a row/col einsum label, kept qubits stay distinct
    labels_row = [q for q in range(n)]
    labels_col = [n + q if q in keep else q for q in range(n)]
    out = [q for q in keep] + [n + q for q in keep]
    reduced = np.einsum(tens, labels_row + labels_col, out)
    d = 2 ** len(keep)
    return reduced.reshape(d, d)


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Trace out every qubit not listed in `keep`.

    `keep` must be a nonempty subset of the register; the result orders the
    kept qubits ascending by their original index.
    """
    keep_sorted = sorted(set(int(q) for q in keep))
    n = rho.n_qubits
    if not keep_sorted:
        raise ValueError("keep set must be nonempty")
    if keep_sorted[0] < 0 or keep_sorted[-1] >= n:
        raise ValueError(f"keep set {keep_sorted} out of range for {n} qubits")
    if len(keep_sorted) == n:
        return rho
    return DensityMatrix(_ptrace_raw(rho.matrix, n, keep_sorted))


def _as_density(x) -> np.ndarray:
    if isinstance(x, PureState):
        return np.outer(x.amplitudes, x.amplitudes.conj())
    if isinstance(x, DensityMatrix):
        return x.matrix
    raise TypeError(f"expected PureState or DensityMatrix, got {type(x).__name__}")


def _sqrtm_psd(mat: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(mat)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


StateLike = Union[PureState, DensityMatrix]


def fidelity(a: StateLike, b: StateLike) -> float:
    """Uhlmann fidelity, squared-overlap convention (1 for identical states)."""
    if isinstance(a, PureState) and isinstance(b, PureState):
        return float(min(1.0, abs(a.overlap(b)) ** 2))
    if isinstance(a, PureState):
        val = np.vdot(a.amplitudes, _as_density(b) @ a.amplitudes)
        return float(min(1.0, max(0.0, val.real)))
    if isinstance(b, PureState):
        return fidelity(b, a)
    ma, mb = _as_density(a), _as_density(b)
    if ma.shape != mb.shape:
        raise ValueError("fidelity requires equal dimensions")
    s = _sqrtm_psd(ma)
    inner = np.linalg.eigvalsh(s @ mb @ s)
    root = float(np.sum(np.sqrt(np.clip(inner, 0.0, None))))
    return float(min(1.0, root**2))


def trace_distance(a: StateLike, b: StateLike) -> float:
    """Half the trace norm of (a - b); ranges over [0, 1]."""
    ma, mb = _as_density(a), _as_density(b)
    if ma.shape != mb.shape:
        raise ValueError("trace_distance requires equal dimensions")
    eigs = np.linalg.eigvalsh(ma - mb)
    return float(min(1.0, 0.5 * np.sum(np.abs(eigs))))


def _embed(mat: np.ndarray, targets: Sequence[int], n: int) -> np.ndarray:
    """Expand an operator on `targets` (in the given order) to the full register."""
    k = len(targets)
    rest = [q for q in range(n) if q not in targets]
    order = list(targets) + rest
    full = np.kron(mat, np.eye(2 ** (n - k), dtype=complex))
    tens = full.reshape((2,) * (2 * n))
    perm = [order.index(q) for q in range(n)]
    axes = perm + [n + p for p in perm]
    return tens.transpose(axes).reshape(2**n, 2**n)


def _check_targets(targets: Sequence[int], arity: int, n: int) -> list:
    tlist = [int(t) for t in targets]
    if len(tlist) != arity:
        raise ValueError(f"operator acts on {arity} qubits but {len(tlist)} targets given")
    if len(set(tlist)) != len(tlist):
        raise ValueError(f"targets must be distinct, got {tlist}")
    if any(t < 0 or t >= n for t in tlist):
        raise ValueError(f"targets {tlist} out of range for {n} qubits")
    return tlist


def apply_unitary(state: StateLike, U: Operator, targets: Sequence[int]) -> StateLike:
    """Apply a unitary to the listed qubits of a pure or mixed state."""
    mat = U.matrix if isinstance(U, Operator) else np.asarray(U, dtype=complex)
    dev = float(np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[0]))))
    if dev > ATOL_CONSTRUCT:
        raise ValueError(f"operator is not unitary (U†U deviates from I by {dev:.3e})")
    n = state.n_qubits
    tlist = _check_targets(targets, mat.shape[0].bit_length() - 1, n)
    full = _embed(mat, tlist, n)
    if isinstance(state, PureState):
        return PureState(full @ state.amplitudes)
    return DensityMatrix(full @ state.matrix @ full.conj().T)


#: Probabilities below this are treated as an impossible branch.
NULL_PROBABILITY = 1e-12


def project(state: PureState, P: Operator, targets: Sequence[int]):
    """Project the listed qubits with P and renormalize.

    Returns (post_state, probability); a probability below NULL_PROBABILITY
    yields (None, probability) instead of a state.
    """
    if not isinstance(state, PureState):
        raise TypeError("project acts on pure states")
    mat = P.matrix
    dev = max(
        float(np.max(np.abs(mat @ mat - mat))),
        float(np.max(np.abs(mat - mat.conj().T))),
    )
    if dev > ATOL_CONSTRUCT:
        raise ValueError(f"operator is not a projector (deviation {dev:.3e})")
    n = state.n_qubits
    tlist = _check_targets(targets, mat.shape[0].bit_length() - 1, n)
    full = _embed(mat, tlist, n)
    new = full @ state.amplitudes
    prob = float(np.real(np.vdot(state.amplitudes, new)))
    prob = max(0.0, prob)
    if prob < NULL_PROBABILITY:
        return None, prob
    return PureState(new / np.sqrt(prob)), prob


def expectation(state: StateLike, O: Operator) -> float:
    """Real expectation value of an observable."""
    mat = O.matrix if isinstance(O, Operator) else np.asarray(O, dtype=complex)
    if isinstance(state, PureState):
        return float(np.real(np.vdot(state.amplitudes, mat @ state.amplitudes)))
    return float(np.real(np.trace(mat @ state.matrix)))
