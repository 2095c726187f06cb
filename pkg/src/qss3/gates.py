"""Named gate constructors, the controlled-XZ entangler, and Bell machinery."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .qcore import ATOL_CONSTRUCT, Operator, PureState, project

__all__ = [
    "GateSpec",
    "gate",
    "controlled",
    "cxz_decomposed",
    "BELL_LABELS",
    "bell_states",
    "bsm",
    "BsmOutcome",
]

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
}

_GATE_NAMES = ("I", "X", "Y", "Z", "H", "R", "CNOT", "CZ", "CXZ")


@dataclass(frozen=True)
class GateSpec:
    """A gate name plus the phase angle for R; theta is meaningful only for R."""

    name: str
    theta: Optional[float] = None

    def __post_init__(self) -> None:
        if self.name not in _GATE_NAMES:
            raise ValueError(f"unknown gate {self.name!r}, expected one of {_GATE_NAMES}")
        if self.name == "R" and self.theta is None:
            raise ValueError("R requires a theta angle")
        if self.name != "R" and self.theta is not None:
            raise ValueError(f"{self.name} takes no theta angle")


def _phase(theta: float) -> np.ndarray:
    # R(theta): |0> fixed, |1> picks up exp(i theta)
    return np.array([[1, 0], [0, np.exp(1j * theta)]], dtype=complex)


def gate(spec) -> Operator:
    """Build the operator for a GateSpec (or a plain gate name string)."""
    if isinstance(spec, str):
        spec = GateSpec(spec)
    if spec.name in _SINGLE:
        return Operator(_SINGLE[spec.name], unitary=True)
    if spec.name == "R":
        return Operator(_phase(spec.theta), unitary=True)
    if spec.name == "CNOT":
        return controlled(Operator(_SINGLE["X"], unitary=True))
    if spec.name == "CZ":
        return controlled(Operator(_SINGLE["Z"], unitary=True))
    if spec.name == "CXZ":
        return controlled(Operator(_SINGLE["X"] @ _SINGLE["Z"], unitary=True))
    raise ValueError(f"unknown gate {spec.name!r}")


def controlled(U: Operator) -> Operator:
    """Two-qubit controlled-U with the control on the first (leftmost) qubit."""
    mat = U.matrix if isinstance(U, Operator) else np.asarray(U, dtype=complex)
    if mat.shape != (2, 2):
        raise ValueError("controlled expects a single-qubit operator")
    full = np.eye(4, dtype=complex)
    full[2:, 2:] = mat
    return Operator(full, unitary=True)


def cxz_decomposed() -> Operator:
    """Controlled-XZ assembled from CNOT and phase-shift gates only.

    The target is wrapped by R(pi/2) after and R(-pi/2) before the CNOT, and
    the control picks up R(-pi/2); the composite matches gate("CXZ") with no
    leftover global phase.
    """
    r_ctl = gate(GateSpec("R", -np.pi / 2)).matrix
    r_pre = gate(GateSpec("R", -np.pi / 2)).matrix
    r_post = gate(GateSpec("R", np.pi / 2)).matrix
    cnot = gate("CNOT").matrix
    eye = _SINGLE["I"]
    full = np.kron(r_ctl, r_post) @ cnot @ np.kron(eye, r_pre)
    return Operator(full, unitary=True)


BELL_LABELS: Tuple[str, ...] = ("phi+", "phi-", "psi+", "psi-")


def bell_states() -> dict:
    """The four Bell states keyed by label, (|00>±|11>)/√2 and (|01>±|10>)/√2."""
    s = 1 / np.sqrt(2)
    return {
        "phi+": PureState(np.array([s, 0, 0, s])),
        "phi-": PureState(np.array([s, 0, 0, -s])),
        "psi+": PureState(np.array([0, s, s, 0])),
        "psi-": PureState(np.array([0, s, -s, 0])),
    }


@dataclass(frozen=True)
class BsmOutcome:
    """One Bell-state measurement branch; post_state is None for dead branches."""

    label: str
    probability: float
    post_state: Optional[PureState]


def bsm(state: PureState, targets: Sequence[int] = (0, 1)) -> list:
    """Bell-state measurement on two qubits of a pure state.

    Returns all four outcome branches; each post_state is the renormalized
    projection of the full register (dead branches carry None).
    """
    if state.n_qubits < 2:
        raise ValueError("bsm needs at least two qubits")
    outcomes = []
    for label, bell in bell_states().items():
        proj = Operator(
            np.outer(bell.amplitudes, bell.amplitudes.conj()), projector=True
        )
        post, prob = project(state, proj, targets)
        outcomes.append(BsmOutcome(label, prob, post))
    total = sum(o.probability for o in outcomes)
    if abs(total - 1.0) > 1e-10:
        raise RuntimeError(f"bsm probabilities sum to {total!r}")
    return outcomes
