"""Finite-shot measurement emulation and count-based estimators.

Counts are modeled as Poissonian, so every error bar here is first-order
Poisson propagation (delta method) on the raw counts. Sampling is a seeded
multinomial draw from a PCG64 generator; the seed travels with the counts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

__all__ = [
    "CountTable",
    "Estimate",
    "sample",
    "estimate_probabilities",
    "expectation_from_probs",
    "witness_from_expectations",
]

_EXPECTATION_BASES = ("ZZ", "XX", "YY")
#: Outcome sign pattern for two-qubit correlators in any local basis,
#: ordered (00, 01, 10, 11) after rotating to the measurement basis.
_CORRELATOR_SIGNS = np.array([1.0, -1.0, -1.0, 1.0])


@dataclass(frozen=True)
class Estimate:
    """A point estimate with a one-sigma error bar."""

    value: float
    sigma: float = 0.0

    def __post_init__(self) -> None:
        if not np.isfinite(self.value) or not np.isfinite(self.sigma):
            raise ValueError("estimate fields must be finite")
        if self.sigma < 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma!r}")


@dataclass(frozen=True)
class CountTable:
    """Outcome counts from one multinomial draw, with seed provenance."""

    outcome_labels: Tuple[str, ...]
    counts: Tuple[int, ...]
    seed: Optional[int]

    def __post_init__(self) -> None:
        labels = tuple(str(x) for x in self.outcome_labels)
        counts = tuple(int(c) for c in self.counts)
        if len(labels) != len(counts):
            raise ValueError("labels and counts must have equal length")
        if len(set(labels)) != len(labels):
            raise ValueError("outcome labels must be distinct")
        if any(c < 0 for c in counts):
            raise ValueError("counts must be nonnegative")
        object.__setattr__(self, "outcome_labels", labels)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return sum(self.counts)


def sample(
    probabilities: Sequence[float],
    n: int,
    seed: int,
    labels: Optional[Sequence[str]] = None,
) -> CountTable:
    """Draw n shots from a discrete distribution; reproducible per seed."""
    probs = np.asarray(probabilities, dtype=float)
    if probs.ndim != 1 or probs.size < 1:
        raise ValueError("probabilities must be a nonempty vector")
    if np.any(probs < -1e-12):
        raise ValueError("probabilities must be nonnegative")
    if abs(float(probs.sum()) - 1.0) > 1e-10:
        raise ValueError(f"probabilities sum to {float(probs.sum())!r}, expected 1")
    if n < 1:
        raise ValueError("shot count must be >= 1")
    probs = np.clip(probs, 0.0, None)
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(int(n), probs)
    if labels is None:
        labels = tuple(f"p{i}" for i in range(probs.size))
    return CountTable(tuple(labels), tuple(int(c) for c in counts), int(seed))


def estimate_probabilities(table: CountTable) -> list:
    """Normalize counts to probabilities with Poisson error bars.

    P_i = N_i / N_total, sigma_i = sqrt(P_i (1 - P_i) / N_total), which is the
    delta-method variance when each raw count is an independent Poisson draw.
    """
    total = table.total
    if total == 0:
        raise ValueError("empty count table, cannot estimate probabilities")
    out = []
    for c in table.counts:
        p = c / total
        out.append(Estimate(p, float(np.sqrt(p * (1.0 - p) / total))))
    return out


def _split(x) -> Tuple[float, float]:
    if isinstance(x, Estimate):
        return x.value, x.sigma
    return float(x), 0.0


def expectation_from_probs(p: Sequence, basis: str) -> Estimate:
    """Two-qubit correlator from four outcome probabilities.

    `p` orders the joint outcomes (00, 01, 10, 11) in the measurement basis
    named by `basis` (ZZ, XX or YY); entries may be floats or Estimates, and
    error bars combine in quadrature.
    """
    if basis not in _EXPECTATION_BASES:
        raise ValueError(f"basis must be one of {_EXPECTATION_BASES}, got {basis!r}")
    if len(p) != 4:
        raise ValueError("expected exactly four outcome probabilities")
    vals, sigs = zip(*(_split(x) for x in p))
    # Slack absorbs tables quoted to two decimals, whose rows sum to ~1.01.
    if abs(sum(vals) - 1.0) > 0.05:
        raise ValueError(f"probabilities sum to {sum(vals)!r}, expected 1")
    if any(v < -1e-12 or v > 1.0 + 1e-12 for v in vals):
        raise ValueError("probabilities must lie in [0, 1]")
    value = float(np.dot(_CORRELATOR_SIGNS, vals))
    sigma = float(np.sqrt(np.sum(np.square(sigs))))
    return Estimate(value, sigma)


def witness_from_expectations(zz, xx, yy) -> Estimate:
    """Entanglement witness value (1 - <ZZ> - <XX> + <YY>)/4 with quadrature error."""
    (vz, sz), (vx, sx), (vy, sy) = _split(zz), _split(xx), _split(yy)
    for name, v in (("zz", vz), ("xx", vx), ("yy", vy)):
        if abs(v) > 1.0 + 1e-9:
            raise ValueError(f"{name} expectation {v!r} outside [-1, 1]")
    value = (1.0 - vz - vx + vy) / 4.0
    sigma = float(np.sqrt(sz**2 + sx**2 + sy**2) / 4.0)
    return Estimate(value, sigma)
