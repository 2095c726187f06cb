"""CPTP channels: Kraus representation, depolarizing family, Choi matrices,
process tomography by linear inversion, and process fidelity.

The Choi matrix convention places the channel input factor first, so the
normalized Choi state of the identity channel is the projector onto
(|00> + |11>)/sqrt(2).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from . import shots
from .qcore import (
    ATOL_DERIVED,
    DensityMatrix,
    Operator,
    PureState,
    _as_density,
    fidelity,
)

__all__ = [
    "QuantumChannel",
    "TomographyRecord",
    "Reconstruction",
    "identity_channel",
    "depolarizing",
    "apply",
    "choi_of",
    "process_fidelity",
    "default_probes",
    "reconstruct",
    "sampled_record",
    "bloch_vector",
]

_PAULIS = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """Completely positive trace-preserving map stored as a Kraus set.

    Kraus operators are d_out x d_in matrices; rectangular channels (for
    example erasure-recovery maps onto a single qubit) are allowed.
    """

    kraus: Tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        ks = tuple(np.array(k, dtype=complex) for k in self.kraus)
        if not ks:
            raise ValueError("channel needs at least one Kraus operator")
        shape = ks[0].shape
        if any(k.shape != shape for k in ks):
            raise ValueError("all Kraus operators must share one shape")
        d_out, d_in = shape
        for d, what in ((d_out, "output"), (d_in, "input")):
            if d < 2 or 2 ** (d.bit_length() - 1) != d:
                raise ValueError(f"{what} dimension {d} is not a power of two >= 2")
        tp = sum(k.conj().T @ k for k in ks)
        dev = float(np.max(np.abs(tp - np.eye(d_in))))
        if dev > ATOL_DERIVED:
            raise ValueError(f"Kraus set is not trace preserving (deviation {dev:.3e})")
        for k in ks:
            k.setflags(write=False)
        object.__setattr__(self, "kraus", ks)

    @property
    def d_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def d_out(self) -> int:
        return self.kraus[0].shape[0]

    @property
    def n_qubits_in(self) -> int:
        return self.d_in.bit_length() - 1

    @property
    def n_qubits_out(self) -> int:
        return self.d_out.bit_length() - 1


def identity_channel(n_qubits: int = 1) -> QuantumChannel:
    return QuantumChannel((np.eye(2**n_qubits, dtype=complex),))


def depolarizing(lam: float) -> QuantumChannel:
    """Single-qubit depolarizing channel; lam = 3/4 erases all information."""
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"depolarizing strength must be in [0, 1], got {lam!r}")
    ks = [np.sqrt(1.0 - lam) * np.eye(2, dtype=complex)]
    ks += [np.sqrt(lam / 3.0) * _PAULIS[p] for p in ("X", "Y", "Z")]
    return QuantumChannel(tuple(ks))


def apply(ch: QuantumChannel, rho) -> DensityMatrix:
    """Run a state through the channel."""
    mat = _as_density(rho)
    if mat.shape[0] != ch.d_in:
        raise ValueError(f"channel expects dimension {ch.d_in}, state has {mat.shape[0]}")
    out = np.zeros((ch.d_out, ch.d_out), dtype=complex)
    for k in ch.kraus:
        out += k @ mat @ k.conj().T
    return DensityMatrix(out)


def _choi_raw(ch: QuantumChannel) -> np.ndarray:
    """Unnormalized Choi matrix, input factor first; trace equals d_in."""
    d = ch.d_in * ch.d_out
    J = np.zeros((d, d), dtype=complex)
    for k in ch.kraus:
        w = k.T.reshape(-1)  # w[(i, a)] = K[a, i]
        J += np.outer(w, w.conj())
    return J


def choi_of(ch: QuantumChannel) -> DensityMatrix:
    """Normalized (trace-one) Choi state of the channel."""
    return DensityMatrix(_choi_raw(ch) / ch.d_in)


def process_fidelity(a: QuantumChannel, b: QuantumChannel) -> float:
    """Uhlmann fidelity between the normalized Choi states of two channels."""
    if (a.d_in, a.d_out) != (b.d_in, b.d_out):
        raise ValueError("process_fidelity requires matching channel dimensions")
    return fidelity(choi_of(a), choi_of(b))


def _tr_out(J: np.ndarray, d_in: int, d_out: int) -> np.ndarray:
    J4 = J.reshape(d_in, d_out, d_in, d_out)
    return np.einsum(J4, [0, 1, 2, 1], [0, 2])


def _kraus_from_choi(J: np.ndarray, d_in: int, d_out: int, atol: float = ATOL_DERIVED):
    """Kraus operators from an unnormalized Choi matrix, with a final
    trace-preservation polish K -> K A^{-1/2}."""
    vals, vecs = np.linalg.eigh((J + J.conj().T) / 2.0)
    ks = []
    for w, v in zip(vals, vecs.T):
        if w > atol:
            ks.append(np.sqrt(w) * v.reshape(d_in, d_out).T)
    if not ks:
        raise RuntimeError("Choi matrix has no positive weight")
    a = sum(k.conj().T @ k for k in ks)
    avals, avecs = np.linalg.eigh(a)
    if float(avals[0]) <= 0:
        raise RuntimeError("degenerate Kraus normalization")
    a_inv_sqrt = (avecs / np.sqrt(avals)) @ avecs.conj().T
    return tuple(k @ a_inv_sqrt for k in ks)


@dataclass(frozen=True, eq=False)
class TomographyRecord:
    """Paired probe inputs and measured outputs of an unknown channel."""

    probe_states: Tuple[DensityMatrix, ...]
    measured_outputs: Tuple[DensityMatrix, ...]

    def __post_init__(self) -> None:
        probes = tuple(self.probe_states)
        outputs = tuple(self.measured_outputs)
        if len(probes) != len(outputs):
            raise ValueError("probe and output lists must have equal length")
        if not probes:
            raise ValueError("record is empty")
        object.__setattr__(self, "probe_states", probes)
        object.__setattr__(self, "measured_outputs", outputs)


def default_probes() -> Tuple[DensityMatrix, ...]:
    """Minimal informationally complete single-qubit probe set |H>,|V>,|+>,|L>."""
    s = 1 / np.sqrt(2)
    kets = [
        np.array([1, 0], dtype=complex),
        np.array([0, 1], dtype=complex),
        np.array([s, s], dtype=complex),
        np.array([s, 1j * s], dtype=complex),
    ]
    return tuple(DensityMatrix(np.outer(k, k.conj())) for k in kets)


@dataclass(frozen=True, eq=False)
class Reconstruction:
    """Result of process tomography.

    `min_choi_eigenvalue` is measured on the trace-one Choi state; when the
    raw inversion is unphysical and projection was disabled, `channel` is None.
    """

    channel: Optional[QuantumChannel]
    min_choi_eigenvalue: float
    physical: bool
    projected: bool


def _project_cptp(J: np.ndarray, d_in: int, d_out: int, atol: float, max_iter: int = 500) -> np.ndarray:
    """Alternating projection onto PSD matrices and the trace-preserving
    affine slice; ends on a TP step."""
    I_in = np.eye(d_in)
    cur = (J + J.conj().T) / 2.0
    for _ in range(max_iter):
        vals, vecs = np.linalg.eigh(cur)
        cur = (vecs * np.clip(vals, 0.0, None)) @ vecs.conj().T
        gap = I_in - _tr_out(cur, d_in, d_out)
        cur = cur + np.kron(gap / d_out, np.eye(d_out))
        cur = (cur + cur.conj().T) / 2.0
        if float(np.linalg.eigvalsh(cur)[0]) >= -0.1 * atol and float(np.max(np.abs(gap))) < 0.1 * atol:
            break
    return cur


def reconstruct(rec: TomographyRecord, project_if_needed: bool = True, atol: float = ATOL_DERIVED) -> Reconstruction:
    """Linear-inversion process tomography.

    Solves the least-squares superoperator mapping probe inputs to measured
    outputs, reshuffles it into a Choi matrix, and flags negativity. With
    `project_if_needed` the Choi matrix is repaired to the nearest CPTP cone
    member by alternating projections before Kraus extraction.
    """
    d = rec.probe_states[0].dim
    if any(p.dim != d for p in rec.probe_states) or any(o.dim != d for o in rec.measured_outputs):
        raise ValueError("mixed dimensions in tomography record")
    v_in = np.column_stack([p.matrix.reshape(-1) for p in rec.probe_states])
    v_out = np.column_stack([o.matrix.reshape(-1) for o in rec.measured_outputs])
    if np.linalg.matrix_rank(v_in, tol=1e-8) < d * d:
        raise ValueError("probe set does not span the operator space")
    S = v_out @ np.linalg.pinv(v_in)
    J = S.reshape(d, d, d, d).transpose(2, 0, 3, 1).reshape(d * d, d * d)
    J = (J + J.conj().T) / 2.0
    min_eig = float(np.linalg.eigvalsh(J / d)[0])
    physical = min_eig >= -atol
    if physical:
        return Reconstruction(QuantumChannel(_kraus_from_choi(J, d, d, atol=atol)), min_eig, True, False)
    if not project_if_needed:
        return Reconstruction(None, min_eig, False, False)
    J_fixed = _project_cptp(J, d, d, atol)
    return Reconstruction(QuantumChannel(_kraus_from_choi(J_fixed, d, d, atol=atol)), min_eig, False, True)


def bloch_vector(rho) -> np.ndarray:
    """(x, y, z) Pauli expectations of a single-qubit state."""
    mat = _as_density(rho)
    if mat.shape != (2, 2):
        raise ValueError("bloch_vector expects a single qubit")
    return np.array([float(np.real(np.trace(_PAULIS[p] @ mat))) for p in ("X", "Y", "Z")])


def _state_from_bloch(b: np.ndarray) -> DensityMatrix:
    r = float(np.linalg.norm(b))
    if r > 1.0:
        b = b / r
    mat = 0.5 * (
        np.eye(2, dtype=complex) + b[0] * _PAULIS["X"] + b[1] * _PAULIS["Y"] + b[2] * _PAULIS["Z"]
    )
    return DensityMatrix(mat)


def sampled_record(
    ch: QuantumChannel,
    shots_per_setting: int,
    seed: int,
    probes: Optional[Sequence[DensityMatrix]] = None,
) -> TomographyRecord:
    """Emulate tomography data collection with finite shots.

    Each probe output is estimated by sampling the X, Y and Z measurement
    distributions and assembling the (clipped) Bloch vector.
    """
    if ch.d_in != 2 or ch.d_out != 2:
        raise ValueError("sampled_record supports single-qubit channels")
    if probes is None:
        probes = default_probes()
    outputs = []
    for i, probe in enumerate(probes):
        exact = apply(ch, probe)
        b_est = np.zeros(3)
        for s, pauli in enumerate(("X", "Y", "Z")):
            mean = float(np.real(np.trace(_PAULIS[pauli] @ exact.matrix)))
            p_plus = min(1.0, max(0.0, (1.0 + mean) / 2.0))
            table = shots.sample(
                (p_plus, 1.0 - p_plus),
                shots_per_setting,
                seed + 3 * i + s,
                labels=(f"{pauli}+", f"{pauli}-"),
            )
            est = shots.estimate_probabilities(table)
            b_est[s] = est[0].value - est[1].value
        outputs.append(_state_from_bloch(b_est))
    return TomographyRecord(tuple(probes), tuple(outputs))
