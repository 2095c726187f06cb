"""The (3,3) threshold protocol: direct and circuit encoders, Bell-measurement
recovery, entangled-secret sharing with witness readout, and confidentiality
analysis for single players and player pairs.

Share A belongs to Alice (the recovering player), shares B and C to Bob and
Charlie, who later feed a joint Bell-state measurement.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import channels, code5
from .gates import BELL_LABELS, GateSpec, bell_states, controlled, gate
from .qcore import (
    ATOL_CONSTRUCT,
    ATOL_DERIVED,
    DensityMatrix,
    Ensemble,
    Operator,
    PureState,
    _embed,
    _ptrace_raw,
    apply_unitary,
    expectation,
    fidelity,
    ket,
    tensor,
    trace_distance,
)

__all__ = [
    "Secret",
    "PROBE_SECRET_NAMES",
    "BRANCH_LABELS",
    "random_secrets",
    "ShareState",
    "RecoveryTable",
    "RecoveryResult",
    "SharingResult",
    "DiscriminationTable",
    "PlayerChannel",
    "ConfidentialityReport",
    "encode_secret",
    "encode_via_circuit",
    "circuit_branch_probability",
    "relating_rotation",
    "recover",
    "recovery_cells",
    "derive_recovery_table",
    "share_entangled",
    "witness_operator",
    "witness_setting_probabilities",
    "min_error_probability",
    "reduced_share",
    "confidentiality_report",
]

_NAMED_AMPLITUDES = {
    "H": (1.0, 0.0),
    "V": (0.0, 1.0),
    "+": (1 / np.sqrt(2), 1 / np.sqrt(2)),
    "-": (1 / np.sqrt(2), -1 / np.sqrt(2)),
    "L": (1 / np.sqrt(2), 1j / np.sqrt(2)),
    "R": (1 / np.sqrt(2), -1j / np.sqrt(2)),
    "v": (0.5, np.sqrt(3) / 2),
    "w": (0.5, -np.sqrt(3) / 2),
}

#: The eight probe states used for reliability sweeps.
PROBE_SECRET_NAMES: Tuple[str, ...] = ("H", "V", "+", "-", "L", "R", "v", "w")


@dataclass(frozen=True)
class Secret:
    """The to-be-shared single-qubit state alpha|H> + beta|V>."""

    alpha: complex
    beta: complex

    def __post_init__(self) -> None:
        a, b = complex(self.alpha), complex(self.beta)
        norm_sq = abs(a) ** 2 + abs(b) ** 2
        if abs(norm_sq - 1.0) > ATOL_DERIVED:
            raise ValueError(f"|alpha|^2+|beta|^2 = {norm_sq!r}, expected 1")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @classmethod
    def from_name(cls, name: str) -> "Secret":
        if name not in _NAMED_AMPLITUDES:
            raise ValueError(f"unknown secret {name!r}, expected one of {sorted(_NAMED_AMPLITUDES)}")
        a, b = _NAMED_AMPLITUDES[name]
        return cls(a, b)

    def ket(self) -> PureState:
        return PureState(np.array([self.alpha, self.beta]))

    def density(self) -> DensityMatrix:
        return self.ket().to_density()


def _random_secret(rng: np.random.Generator) -> Secret:
    raw = rng.normal(size=4)
    vec = raw[:2] + 1j * raw[2:]
    vec = vec / np.linalg.norm(vec)
    return Secret(vec[0], vec[1])


def random_secrets(count: int, seed: int) -> List[Secret]:
    """Haar-distributed secrets from a seeded generator."""
    rng = np.random.default_rng(seed)
    return [_random_secret(rng) for _ in range(count)]


BRANCH_LABELS: Tuple[Tuple[int, int], ...] = ((0, 0), (0, 1), (1, 0), (1, 1))

_E00 = np.array([1, 0, 0, 0], dtype=complex)
_E01 = np.array([0, 1, 0, 0], dtype=complex)
_E10 = np.array([0, 0, 1, 0], dtype=complex)
_E11 = np.array([0, 0, 0, 1], dtype=complex)


def _branch_vector(a: int, b: int, alpha: complex, beta: complex) -> np.ndarray:
    """Amplitudes of |phi_ab>: an Alice spinor against a Bob-Charlie pair ket,
    combined with 1/2 so the result is unit norm."""
    u = np.array([alpha, beta])
    w = np.array([beta, -alpha])
    v = np.array([beta, alpha])
    t = np.array([alpha, -beta])
    if a == 0:
        first = np.kron(u, _E00 - _E11)
        second = np.kron(w, _E00 + _E11)
    else:
        first = np.kron(v, _E01 - _E10)
        second = np.kron(t, _E01 + _E10)
    sign = -1.0 if b == 0 else 1.0
    return (first + sign * second) / 2.0


@dataclass(frozen=True, eq=False)
class ShareState:
    """The dealer's output: an equal four-branch mixture over shares A, B, C."""

    ensemble: Ensemble
    branch_labels: Tuple[Tuple[int, int], ...]

    def __post_init__(self) -> None:
        if self.ensemble.n_qubits != 3:
            raise ValueError("shares live on three qubits")
        if len(self.ensemble.entries) != 4 or tuple(self.branch_labels) != BRANCH_LABELS:
            raise ValueError("expected the four branches (0,0),(0,1),(1,0),(1,1)")
        for weight, _ in self.ensemble.entries:
            if abs(weight - 0.25) > ATOL_CONSTRUCT:
                raise ValueError(f"branch weight {weight!r}, expected 1/4")
        object.__setattr__(self, "branch_labels", tuple(self.branch_labels))

    def branch(self, a: int, b: int) -> PureState:
        return self.ensemble.entries[self.branch_labels.index((a, b))][1]

    def to_density(self) -> DensityMatrix:
        return self.ensemble.to_density()


def encode_secret(s: Secret) -> ShareState:
    """Split a secret into the four-branch three-share mixture."""
    entries = tuple(
        (0.25, PureState(_branch_vector(a, b, s.alpha, s.beta))) for a, b in BRANCH_LABELS
    )
    return ShareState(Ensemble(entries), BRANCH_LABELS)


@lru_cache(maxsize=1)
def relating_rotation() -> Operator:
    """The fixed local rotation linking the share mixture to the erasure form.

    A Hadamard on share A carries the five-qubit-code erasure mixture (last
    two positions lost) onto the protocol mixture. Computed once here and
    verified numerically before use.
    """
    h3 = tensor(tensor(gate("H"), gate("I")), gate("I"))
    for probe in (Secret.from_name("+"), Secret(0.6, 0.8j)):
        erased = code5.erase(code5.encode5(probe.alpha, probe.beta), code5.ErasureSpec({3, 4}))
        rotated = h3.matrix @ erased.matrix @ h3.matrix.conj().T
        direct = encode_secret(probe).to_density().matrix
        dev = float(np.max(np.abs(rotated - direct)))
        if dev > ATOL_DERIVED:
            raise RuntimeError(f"relating rotation failed verification (deviation {dev:.3e})")
    return h3


def _circuit_branch(s: Secret, a: int, b: int) -> Tuple[np.ndarray, float]:
    """Run the four-qubit encoder circuit and postselect the readout bit.

    Returns the unnormalized three-share amplitudes and the branch probability
    P(b | a) of the X-basis readout.
    """
    state = tensor(s.ket(), ket("000"))
    state = apply_unitary(state, gate("H"), [1])
    state = apply_unitary(state, gate("CNOT"), [1, 2])
    state = apply_unitary(state, gate("CNOT"), [2, 3])
    if a:
        state = apply_unitary(state, gate("X"), [0])
        state = apply_unitary(state, gate("X"), [3])
    x, h, z = gate("X").matrix, gate("H").matrix, gate("Z").matrix
    state = apply_unitary(state, Operator(x @ h @ x, unitary=True), [1])
    # The entangler pairs the ancilla with the secret qubit. Taking the
    # controlled product in this operator order (Z then X read right-to-left
    # as matrices) differs from the CXZ gate only by a Z on the measured
    # ancilla, which fixes which X-basis outcome is labelled b = 1.
    entangler = controlled(Operator(z @ x, unitary=True))
    state = apply_unitary(state, entangler, [1, 0])
    readout = np.array([1.0, 1.0 if b == 0 else -1.0]) / np.sqrt(2)
    amps = state.amplitudes.reshape(2, 2, 2, 2)
    reduced = np.tensordot(readout.conj(), amps, axes=([0], [1]))
    prob = float(np.real(np.vdot(reduced, reduced)))
    return reduced.reshape(-1), prob


def encode_via_circuit(s: Secret, a: int, b: int) -> PureState:
    """Gate-level encoder: GHZ ancilla, conditional bit flips for the random
    bit a, the controlled entangler, and an X-basis readout postselected on b.

    The output equals encode_secret(s).branch(a, b) up to global phase.
    """
    if a not in (0, 1) or b not in (0, 1):
        raise ValueError("bits a, b must be 0 or 1")
    vec, prob = _circuit_branch(s, a, b)
    if prob < 1e-12:
        raise RuntimeError("circuit branch has vanishing probability")
    return PureState(vec / np.sqrt(prob))


def circuit_branch_probability(s: Secret, a: int, b: int) -> float:
    """Probability of readout bit b in the encoder circuit, given bit a."""
    if a not in (0, 1) or b not in (0, 1):
        raise ValueError("bits a, b must be 0 or 1")
    return _circuit_branch(s, a, b)[1]


_CORRECTION_NAMES = ("XZ", "I", "Z", "X")


def _correction_matrix(name: str) -> np.ndarray:
    x, z = gate("X").matrix, gate("Z").matrix
    return {"XZ": x @ z, "I": np.eye(2, dtype=complex), "Z": z, "X": x}[name]


@dataclass(frozen=True)
class RecoveryTable:
    """Bijection from Bell outcomes to the corrections {XZ, I, Z, X}."""

    corrections: Dict[str, str]

    def __post_init__(self) -> None:
        mapping = {}
        for label, corr in dict(self.corrections).items():
            if label not in BELL_LABELS:
                raise ValueError(f"unknown Bell label {label!r}")
            if isinstance(corr, str):
                name = corr
            else:
                mat = corr.matrix if isinstance(corr, Operator) else np.asarray(corr)
                matches = [n for n in _CORRECTION_NAMES if np.allclose(mat, _correction_matrix(n), atol=1e-12)]
                if not matches:
                    raise ValueError("correction operator is not one of XZ, I, Z, X")
                name = matches[0]
            if name not in _CORRECTION_NAMES:
                raise ValueError(f"unknown correction {name!r}")
            mapping[label] = name
        if set(mapping) != set(BELL_LABELS) or set(mapping.values()) != set(_CORRECTION_NAMES):
            raise ValueError("table must be a bijection from Bell outcomes onto {XZ, I, Z, X}")
        object.__setattr__(self, "corrections", mapping)

    def operator(self, label: str) -> Operator:
        return Operator(_correction_matrix(self.corrections[label]), unitary=True)

    def as_dict(self) -> Dict[str, str]:
        return dict(self.corrections)


def _bsm_cells_pure(branch: PureState) -> List[Tuple[str, float, Optional[np.ndarray]]]:
    """Bell outcomes on shares (B, C) of a pure branch.

    Returns (label, probability, normalized Alice amplitudes or None)."""
    amps = branch.amplitudes.reshape(2, 4)
    cells = []
    for label, bell in bell_states().items():
        alice = amps @ bell.amplitudes.conj()
        prob = float(np.real(np.vdot(alice, alice)))
        if prob < 1e-12:
            cells.append((label, prob, None))
        else:
            cells.append((label, prob, alice / np.sqrt(prob)))
    return cells


def _depolarize_qubits(rho: np.ndarray, n: int, qubits: Sequence[int], lam: float) -> np.ndarray:
    if lam == 0.0:
        return rho
    ch = channels.depolarizing(lam)
    out = rho
    for q in qubits:
        acc = np.zeros_like(out)
        for k in ch.kraus:
            full = _embed(k, [q], n)
            acc += full @ out @ full.conj().T
        out = acc
    return out


def _bsm_cells_density(rho3: np.ndarray) -> List[Tuple[str, float, Optional[np.ndarray]]]:
    """Bell outcomes on shares (B, C) of a three-share density matrix.

    Returns (label, probability, conditional Alice 2x2 matrix or None)."""
    cells = []
    for label, bell in bell_states().items():
        contract = np.kron(np.eye(2), bell.amplitudes.conj().reshape(1, 4))
        cond = contract @ rho3 @ contract.conj().T
        prob = float(np.real(np.trace(cond)))
        if prob < 1e-12:
            cells.append((label, prob, None))
        else:
            cells.append((label, prob, cond / prob))
    return cells


@dataclass(frozen=True, eq=False)
class RecoveryResult:
    """Recovered dealer-side state plus per-(branch, outcome) diagnostics."""

    recovered: DensityMatrix
    fidelities: Dict[tuple, float]
    outcome_probabilities: Dict[tuple, float]


def recover(share, table: RecoveryTable, secret: Secret) -> RecoveryResult:
    """Bell-measure shares B and C, correct share A, and compare to the secret.

    `share` may be a full ShareState or one pure branch. Fidelities are
    reported for every outcome that can occur; impossible outcomes appear in
    the probability map with weight 0.
    """
    if not isinstance(table, RecoveryTable):
        table = RecoveryTable(table)
    if isinstance(share, ShareState):
        branches = [
            (weight, label, state)
            for (weight, state), label in zip(share.ensemble.entries, share.branch_labels)
        ]
    elif isinstance(share, PureState):
        if share.n_qubits != 3:
            raise ValueError("a share branch has three qubits")
        branches = [(1.0, "branch", share)]
    else:
        raise TypeError("share must be a ShareState or a PureState branch")
    target = secret.ket()
    acc = np.zeros((2, 2), dtype=complex)
    fidelities: Dict[tuple, float] = {}
    probabilities: Dict[tuple, float] = {}
    for weight, label, state in branches:
        for bell_label, prob, alice in _bsm_cells_pure(state):
            probabilities[(label, bell_label)] = prob
            if alice is None:
                continue
            corrected = table.operator(bell_label).matrix @ alice
            acc += weight * prob * np.outer(corrected, corrected.conj())
            fidelities[(label, bell_label)] = float(abs(np.vdot(target.amplitudes, corrected)) ** 2)
    return RecoveryResult(DensityMatrix(acc), fidelities, probabilities)


def recovery_cells(
    secret: Secret,
    table: Optional[RecoveryTable] = None,
    noise: float = 0.0,
) -> List[Tuple[Tuple[int, int], str, float, float]]:
    """Per-(branch, Bell outcome) probability and recovery fidelity.

    With nonzero `noise`, each share passes through depolarizing(noise) before
    the measurement, and conditional states are handled as mixtures.
    """
    if table is None:
        table = derive_recovery_table()
    share = encode_secret(secret)
    target = secret.ket().amplitudes
    cells = []
    for (a, b) in BRANCH_LABELS:
        branch = share.branch(a, b)
        if noise == 0.0:
            raw = _bsm_cells_pure(branch)
            for bell_label, prob, alice in raw:
                if alice is None:
                    cells.append(((a, b), bell_label, prob, None))
                    continue
                corrected = table.operator(bell_label).matrix @ alice
                fid = float(abs(np.vdot(target, corrected)) ** 2)
                cells.append(((a, b), bell_label, prob, fid))
        else:
            rho = _depolarize_qubits(
                np.outer(branch.amplitudes, branch.amplitudes.conj()), 3, [0, 1, 2], noise
            )
            for bell_label, prob, alice_dm in _bsm_cells_density(rho):
                if alice_dm is None:
                    cells.append(((a, b), bell_label, prob, None))
                    continue
                u = table.operator(bell_label).matrix
                corrected = u @ alice_dm @ u.conj().T
                fid = float(np.real(np.vdot(target, corrected @ target)))
                cells.append(((a, b), bell_label, prob, fid))
    return cells


_TABLE_SEED = 20240523


@lru_cache(maxsize=1)
def derive_recovery_table() -> RecoveryTable:
    """Find the correction table by brute force and assert it is unique.

    Tries all 24 bijections from Bell outcomes onto {XZ, I, Z, X} against ten
    random secrets; exactly one achieves unit fidelity on every branch and
    live outcome.
    """
    secrets = random_secrets(10, _TABLE_SEED)
    shares = [(s, encode_secret(s)) for s in secrets]
    valid = []
    for perm in itertools.permutations(_CORRECTION_NAMES):
        mapping = dict(zip(BELL_LABELS, perm))
        mats = {label: _correction_matrix(name) for label, name in mapping.items()}
        ok = True
        for s, share in shares:
            target = s.ket().amplitudes
            for (a, b) in BRANCH_LABELS:
                for bell_label, _, alice in _bsm_cells_pure(share.branch(a, b)):
                    if alice is None:
                        continue
                    corrected = mats[bell_label] @ alice
                    if abs(np.vdot(target, corrected)) ** 2 < 1.0 - 1e-9:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            valid.append(mapping)
    if len(valid) != 1:
        raise RuntimeError(f"expected a unique recovery table, found {len(valid)}")
    return RecoveryTable(valid[0])


_PAULI_2Q = {
    name: np.kron(gate(name).matrix, gate(name).matrix) for name in ("X", "Y", "Z")
}


def witness_operator() -> Operator:
    """Entanglement witness (II - XX + YY - ZZ)/4; negative mean certifies
    entanglement with the target pair."""
    mat = (
        np.eye(4, dtype=complex) - _PAULI_2Q["X"] + _PAULI_2Q["Y"] - _PAULI_2Q["Z"]
    ) / 4.0
    return Operator(mat)


# per-qubit rotations carrying each setting's eigenbasis onto the Z basis
_SETTING_ROTATIONS = {
    "ZZ": np.eye(2, dtype=complex),
    "XX": gate("H").matrix,
    "YY": gate("H").matrix @ gate(GateSpec("R", -np.pi / 2)).matrix,
}


def witness_setting_probabilities(rho: DensityMatrix) -> Dict[str, np.ndarray]:
    """Joint outcome probabilities (00, 01, 10, 11) for the three witness
    measurement settings on a two-qubit state."""
    if rho.n_qubits != 2:
        raise ValueError("witness settings act on a two-qubit state")
    out = {}
    for setting, u1 in _SETTING_ROTATIONS.items():
        full = np.kron(u1, u1)
        rotated = full @ rho.matrix @ full.conj().T
        out[setting] = np.clip(np.real(np.diag(rotated)), 0.0, 1.0)
    return out


@dataclass(frozen=True, eq=False)
class SharingResult:
    """Entangled-sharing outcome: dealer-recoverer pair state (when it is
    physical), witness mean, and fidelity with the target pair."""

    rho: Optional[DensityMatrix]
    witness: float
    fidelity: float


def share_entangled(
    noise: float = 0.0,
    expectations: Optional[Tuple[float, float, float]] = None,
) -> SharingResult:
    """Share one half of a maximally entangled pair through the protocol.

    With `expectations` = (<ZZ>, <XX>, <YY>) the function skips simulation and
    just evaluates the witness arithmetic, returning the Bell-diagonal state
    consistent with those correlators when it is physical. Otherwise photon 2
    of a fresh pair is encoded into the three shares, optionally depolarized
    at strength `noise` per share, then recovered onto Alice.
    """
    if expectations is not None:
        zz, xx, yy = (float(x) for x in expectations)
        witness = (1.0 - zz - xx + yy) / 4.0
        fid = 0.5 - witness
        mat = (
            np.eye(4, dtype=complex)
            + xx * _PAULI_2Q["X"]
            + yy * _PAULI_2Q["Y"]
            + zz * _PAULI_2Q["Z"]
        ) / 4.0
        rho = None
        if float(np.linalg.eigvalsh(mat)[0]) >= -ATOL_DERIVED:
            rho = DensityMatrix(mat)
        return SharingResult(rho, witness, fid)

    table = derive_recovery_table()
    pair = bell_states()["phi+"]
    coeff = pair.amplitudes.reshape(2, 2)
    rho4 = np.zeros((16, 16), dtype=complex)
    for (a, b) in BRANCH_LABELS:
        iso = np.column_stack(
            [_branch_vector(a, b, 1.0, 0.0), _branch_vector(a, b, 0.0, 1.0)]
        )
        vec = (coeff @ iso.T).reshape(-1)
        rho4 += 0.25 * np.outer(vec, vec.conj())
    rho4 = _depolarize_qubits(rho4, 4, [1, 2, 3], noise)
    acc = np.zeros((4, 4), dtype=complex)
    for bell_label, bell in bell_states().items():
        contract = np.kron(np.eye(4), bell.amplitudes.conj().reshape(1, 4))
        cond = contract @ rho4 @ contract.conj().T
        prob = float(np.real(np.trace(cond)))
        if prob < 1e-12:
            continue
        u = np.kron(np.eye(2), table.operator(bell_label).matrix)
        acc += u @ cond @ u.conj().T
    rho = DensityMatrix(acc)
    witness = expectation(rho, witness_operator())
    fid = fidelity(rho, pair)
    return SharingResult(rho, witness, fid)


def min_error_probability(a, b) -> float:
    """Minimum error probability for distinguishing two equally likely states,
    (1 - trace_distance)/2."""
    return (1.0 - trace_distance(a, b)) / 2.0


@dataclass(frozen=True, eq=False)
class DiscriminationTable:
    """Pairwise minimum-error probabilities over a set of labelled states."""

    labels: Tuple[str, ...]
    P: np.ndarray

    def __post_init__(self) -> None:
        labels = tuple(str(x) for x in self.labels)
        mat = np.array(self.P, dtype=float)
        if mat.shape != (len(labels), len(labels)):
            raise ValueError("P must be square over the labels")
        if not np.all(mat.diagonal() == 0.5):
            raise ValueError("same-state entries must equal 0.5 exactly")
        if np.max(np.abs(mat - mat.T)) > ATOL_CONSTRUCT:
            raise ValueError("P must be symmetric")
        if np.min(mat) < -ATOL_CONSTRUCT or np.max(mat) > 0.5 + ATOL_CONSTRUCT:
            raise ValueError("entries must lie in [0, 0.5]")
        mat.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "P", mat)


@dataclass(frozen=True, eq=False)
class PlayerChannel:
    """Tomography result for the dealer-to-player map of one share."""

    player: str
    reconstruction: channels.Reconstruction
    fidelity_vs_erasing: float


@dataclass(frozen=True, eq=False)
class ConfidentialityReport:
    """Discrimination grids per player pair plus per-player channel fits."""

    pair_tables: Dict[str, DiscriminationTable]
    players: Dict[str, PlayerChannel]


_PAIR_KEEP = {"AB": (0, 1), "BC": (1, 2), "AC": (0, 2)}
_PLAYER_KEEP = {"A": (0,), "B": (1,), "C": (2,)}


def reduced_share(
    s: Secret, keep: Tuple[int, ...], noise: float = 0.0
) -> DensityMatrix:
    """State of the share positions in `keep` (0=A, 1=B, 2=C) when the other
    players withhold theirs, optionally after per-share depolarizing noise."""
    rho = encode_secret(s).to_density().matrix
    rho = _depolarize_qubits(rho, 3, [0, 1, 2], noise)
    return DensityMatrix(_ptrace_raw(rho, 3, list(keep)))


def confidentiality_report(
    secrets: Sequence[Union[str, Secret]], noise: float = 0.0
) -> ConfidentialityReport:
    """What fewer than three players can see.

    For every player pair, the minimum-error discrimination grid over the
    given secrets; for every single player, tomography of the secret-to-share
    map against the fully erasing depolarizing channel.
    """
    if len(secrets) < 2:
        raise ValueError("need at least two secrets to compare")
    labelled: List[Tuple[str, Secret]] = []
    for i, s in enumerate(secrets):
        if isinstance(s, str):
            labelled.append((s, Secret.from_name(s)))
        else:
            labelled.append((f"s{i}", s))
    pair_tables = {}
    for pair, keep in _PAIR_KEEP.items():
        reduced = [reduced_share(s, keep, noise) for _, s in labelled]
        m = len(reduced)
        P = np.full((m, m), 0.5)
        for i in range(m):
            for j in range(i + 1, m):
                P[i, j] = P[j, i] = min_error_probability(reduced[i], reduced[j])
        pair_tables[pair] = DiscriminationTable(tuple(n for n, _ in labelled), P)
    erasing = channels.depolarizing(0.75)
    players = {}
    for player, keep in _PLAYER_KEEP.items():
        probe_secrets = [Secret.from_name(n) for n in ("H", "V", "+", "L")]
        record = channels.TomographyRecord(
            tuple(s.density() for s in probe_secrets),
            tuple(reduced_share(s, keep, noise) for s in probe_secrets),
        )
        recon = channels.reconstruct(record)
        fid = channels.process_fidelity(recon.channel, erasing)
        players[player] = PlayerChannel(player, recon, fid)
    return ConfidentialityReport(pair_tables, players)
