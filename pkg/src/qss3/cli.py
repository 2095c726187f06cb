"""Experiment harness: one subcommand per protocol study, machine-readable reports.

Every subcommand writes a report (JSON, or CSV with one file per tabular
block) plus PNG figures next to it. Reports are deterministic for a fixed
configuration: the only field that varies between identical runs is the
provenance timestamp.

Exit codes: 0 success, 2 invalid configuration, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import __version__, channels, code5, plotting, qss, shots
from .gates import GateSpec, cxz_decomposed, gate
from .qcore import DensityMatrix, fidelity

__all__ = ["CliError", "RunConfig", "Report", "run", "write_report", "main"]

SUBCOMMANDS = (
    "reliability",
    "witness",
    "tomography",
    "discriminate",
    "erasure",
    "kl-check",
    "circuit-check",
)
# These analyze exact structure; there is no measurement to sample.
_EXACT_ONLY = ("erasure", "kl-check", "circuit-check")

_BELL_ORDER = ("phi+", "phi-", "psi+", "psi-")
_BASIS_2Q = ("00", "01", "10", "11")


class CliError(ValueError):
    """Invalid user input; maps to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    """Fully validated invocation parameters for one harness run."""

    subcommand: str
    shots: Union[int, str] = "exact"
    noise: float = 0.0
    seed: int = 0
    fmt: str = "json"
    out: str = ""
    no_plot: bool = False
    secret: Optional[qss.Secret] = None
    secret_label: Optional[str] = None
    secret_names: Tuple[str, ...] = ()
    from_probs: Optional[Tuple[Tuple[float, ...], ...]] = None
    player: str = "A"
    erase: Tuple[int, ...] = (3, 4)
    draws: int = 50

    def echo(self) -> Dict[str, object]:
        base: Dict[str, object] = {
            "subcommand": self.subcommand,
            "shots": self.shots,
            "seed": self.seed,
            "format": self.fmt,
            "out": self.out,
            "plot": not self.no_plot,
        }
        if self.subcommand not in _EXACT_ONLY:
            base["noise"] = self.noise
        if self.subcommand in ("reliability", "erasure", "circuit-check"):
            base["secret"] = self.secret_label
        if self.subcommand == "witness":
            base["from_probs"] = (
                None if self.from_probs is None else [list(r) for r in self.from_probs]
            )
        if self.subcommand == "tomography":
            base["player"] = self.player
        if self.subcommand == "discriminate":
            base["secrets"] = list(self.secret_names)
        if self.subcommand == "erasure":
            base["erase"] = "".join(str(q) for q in self.erase)
        if self.subcommand == "kl-check":
            base["draws"] = self.draws
        return base


@dataclass(frozen=True)
class Report:
    """Config echo, named result blocks, figure files, and provenance."""

    config: Dict[str, object]
    results: Dict[str, object]
    figures: List[str] = field(default_factory=list)
    provenance: Dict[str, object] = field(default_factory=dict)

    def as_dict(self) -> Dict[str, object]:
        return {
            "config": self.config,
            "results": self.results,
            "figures": list(self.figures),
            "provenance": self.provenance,
        }


# ---------------------------------------------------------------- parsing


def _parse_secret(text: str) -> Tuple[qss.Secret, str]:
    """A probe name, or four comma-separated reals a_re,a_im,b_re,b_im."""
    if text in qss.PROBE_SECRET_NAMES:
        return qss.Secret.from_name(text), text
    parts = text.split(",")
    if len(parts) != 4:
        raise CliError(
            f"malformed secret {text!r}: expected a name in "
            f"{'/'.join(qss.PROBE_SECRET_NAMES)} or a_re,a_im,b_re,b_im"
        )
    try:
        a_re, a_im, b_re, b_im = (float(p) for p in parts)
    except ValueError as exc:
        raise CliError(f"malformed secret {text!r}: {exc}") from None
    try:
        return qss.Secret(complex(a_re, a_im), complex(b_re, b_im)), "custom"
    except ValueError as exc:
        raise CliError(f"malformed secret {text!r}: {exc}") from None


def _parse_shots(text: str) -> Union[int, str]:
    if text == "exact":
        return "exact"
    try:
        n = int(text)
    except ValueError:
        raise CliError(f"shots must be a positive integer or 'exact', got {text!r}") from None
    if n < 1:
        raise CliError(f"shots must be >= 1, got {n}")
    return n


def _parse_from_probs(text: str) -> Tuple[Tuple[float, ...], ...]:
    rows = [r for r in text.split(";") if r.strip()]
    if len(rows) != 3:
        raise CliError("from-probs needs three semicolon-separated rows (ZZ;XX;YY)")
    parsed = []
    for row in rows:
        parts = row.split(",")
        if len(parts) != 4:
            raise CliError(f"from-probs row {row!r} must have four comma-separated values")
        try:
            vals = tuple(float(p) for p in parts)
        except ValueError as exc:
            raise CliError(f"from-probs row {row!r}: {exc}") from None
        if any(v < 0.0 or v > 1.0 for v in vals):
            raise CliError(f"from-probs row {row!r} has entries outside [0, 1]")
        if abs(sum(vals) - 1.0) > 0.05:
            raise CliError(f"from-probs row {row!r} sums to {sum(vals)}, expected ~1")
        parsed.append(vals)
    return tuple(parsed)


def _parse_erase(text: str) -> Tuple[int, ...]:
    try:
        positions = tuple(sorted(int(p) for p in text.split(",") if p.strip() != ""))
    except ValueError as exc:
        raise CliError(f"malformed erase pattern {text!r}: {exc}") from None
    if not 1 <= len(positions) <= 2:
        raise CliError("erase pattern must list one or two qubit positions")
    if len(set(positions)) != len(positions):
        raise CliError(f"erase pattern {text!r} repeats a position")
    if any(q < 0 or q > 4 for q in positions):
        raise CliError(f"erase positions {positions} out of range 0..4")
    return positions


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qss3",
        description="Simulation harness for (3,3) threshold quantum secret sharing.",
    )
    parser.add_argument("--version", action="version", version=f"qss3 {__version__}")
    sub = parser.add_subparsers(dest="subcommand", metavar="subcommand")
    sub.required = True

    def common(p: argparse.ArgumentParser, shots_help: str) -> None:
        p.add_argument("--shots", default="exact", metavar="N|exact", help=shots_help)
        p.add_argument("--seed", type=int, default=0, help="base RNG seed (default 0)")
        p.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
        p.add_argument("--out", default=None, metavar="PATH", help="report path")
        p.add_argument("--no-plot", action="store_true", help="skip PNG figures")

    p = sub.add_parser("reliability", help="recovery fidelity over the probe-secret grid")
    p.add_argument("--secret", default=None, help="extra secret row (name or a_re,a_im,b_re,b_im)")
    p.add_argument("--noise", type=float, default=0.0, help="per-share depolarizing strength")
    common(p, "shots per secret over the (branch, outcome) cells")

    p = sub.add_parser("witness", help="entanglement witness for the shared pair")
    p.add_argument(
        "--from-probs",
        default=None,
        metavar="ZZ;XX;YY",
        help="three rows of four outcome probabilities, e.g. '0.4,0.1,0.1,0.4;...;...'",
    )
    p.add_argument("--noise", type=float, default=0.0, help="per-share depolarizing strength")
    common(p, "shots per measurement setting")

    p = sub.add_parser("tomography", help="process tomography of one player's channel")
    p.add_argument("--player", choices=("A", "B", "C"), default="A")
    p.add_argument("--noise", type=float, default=0.0, help="per-share depolarizing strength")
    common(p, "shots per probe and Pauli setting")

    p = sub.add_parser("discriminate", help="pairwise state discrimination per player pair")
    p.add_argument(
        "--secrets",
        default=",".join(("H", "V", "+", "-", "L", "R")),
        help="comma-separated probe names (at least two)",
    )
    p.add_argument("--noise", type=float, default=0.0, help="per-share depolarizing strength")
    common(p, "shots per state and Pauli setting")

    p = sub.add_parser("erasure", help="erasure branches and synthesized recovery")
    p.add_argument("--secret", default="+", help="secret to encode (name or quadruple)")
    p.add_argument("--erase", default="3,4", metavar="Q[,Q]", help="erased positions (default 3,4)")
    common(p, "must be 'exact'; this is a structural analysis")

    p = sub.add_parser("kl-check", help="error-correction condition over Pauli error products")
    p.add_argument("--draws", type=int, default=50, help="random weight-3 labels to test")
    common(p, "must be 'exact'; this is a structural analysis")

    p = sub.add_parser("circuit-check", help="gate-level encoder against the direct branches")
    p.add_argument("--secret", default=None, help="restrict to one secret (default: probe sweep)")
    common(p, "must be 'exact'; this is a structural analysis")

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    shots_mode = _parse_shots(args.shots)
    if args.seed < 0 or args.seed >= 2**64:
        raise CliError(f"seed must fit an unsigned 64-bit integer, got {args.seed}")
    sub = args.subcommand
    if sub in _EXACT_ONLY and shots_mode != "exact":
        raise CliError(f"{sub} is an exact analysis; use --shots exact")

    noise = float(getattr(args, "noise", 0.0))
    if not 0.0 <= noise <= 1.0:
        raise CliError(f"noise must lie in [0, 1], got {noise}")

    secret = None
    secret_label = None
    if getattr(args, "secret", None) is not None:
        secret, secret_label = _parse_secret(args.secret)

    secret_names: Tuple[str, ...] = ()
    if sub == "discriminate":
        names = tuple(n for n in args.secrets.split(",") if n != "")
        if len(names) < 2:
            raise CliError("discriminate needs at least two secrets")
        if len(set(names)) != len(names):
            raise CliError("discriminate secrets must be distinct")
        for n in names:
            if n not in qss.PROBE_SECRET_NAMES:
                raise CliError(
                    f"unknown secret {n!r}; discriminate accepts names in "
                    f"{'/'.join(qss.PROBE_SECRET_NAMES)}"
                )
        secret_names = names

    from_probs = None
    if sub == "witness" and args.from_probs is not None:
        from_probs = _parse_from_probs(args.from_probs)
        if shots_mode != "exact":
            raise CliError("from-probs evaluates given data; use --shots exact")
        if noise != 0.0:
            raise CliError("from-probs evaluates given data; --noise does not apply")

    erase = (3, 4)
    if sub == "erasure":
        erase = _parse_erase(args.erase)

    draws = int(getattr(args, "draws", 50))
    if sub == "kl-check" and draws < 1:
        raise CliError(f"draws must be >= 1, got {draws}")

    out = args.out if args.out is not None else f"qss3-{sub}.{args.fmt}"
    return RunConfig(
        subcommand=sub,
        shots=shots_mode,
        noise=noise,
        seed=int(args.seed),
        fmt=args.fmt,
        out=out,
        no_plot=bool(args.no_plot),
        secret=secret,
        secret_label=secret_label,
        secret_names=secret_names,
        from_probs=from_probs,
        player=getattr(args, "player", "A"),
        erase=erase,
        draws=draws,
    )


# ---------------------------------------------------------------- helpers


_MEAS_ROT = {
    "Z": np.eye(2, dtype=complex),
    "X": gate("H").matrix,
    "Y": gate("H").matrix @ gate(GateSpec("R", -np.pi / 2)).matrix,
}
_PAULI_MAT = {name: gate(name).matrix for name in ("I", "X", "Y", "Z")}


def _psd_state(mat: np.ndarray) -> DensityMatrix:
    """Nearest unit-trace PSD state: eigenvalue clip plus renormalization."""
    mat = (mat + mat.conj().T) / 2.0
    vals, vecs = np.linalg.eigh(mat)
    mat = (vecs * np.clip(vals, 0.0, None)) @ vecs.conj().T
    return DensityMatrix(mat / float(np.real(np.trace(mat))))


def _sampled_qubit(rho: DensityMatrix, n: int, seed: int) -> DensityMatrix:
    """Single-qubit state estimate from X/Y/Z measurements, n shots each."""
    b = np.zeros(3)
    for s, pauli in enumerate(("X", "Y", "Z")):
        mean = float(np.real(np.trace(_PAULI_MAT[pauli] @ rho.matrix)))
        p_plus = min(1.0, max(0.0, (1.0 + mean) / 2.0))
        table = shots.sample((p_plus, 1.0 - p_plus), n, seed + s, labels=(f"{pauli}+", f"{pauli}-"))
        est = shots.estimate_probabilities(table)
        b[s] = est[0].value - est[1].value
    mat = 0.5 * (
        np.eye(2, dtype=complex)
        + b[0] * _PAULI_MAT["X"]
        + b[1] * _PAULI_MAT["Y"]
        + b[2] * _PAULI_MAT["Z"]
    )
    return _psd_state(mat)


def _sampled_two_qubits(rho: DensityMatrix, n: int, seed: int) -> DensityMatrix:
    """Two-qubit state estimate from the nine Pauli settings, n shots each."""
    singles: Dict[Tuple[int, str], List[float]] = {}
    correlators: Dict[str, float] = {}
    for k, (p1, p2) in enumerate(itertools.product("XYZ", repeat=2)):
        u = np.kron(_MEAS_ROT[p1], _MEAS_ROT[p2])
        probs = np.clip(np.real(np.diag(u @ rho.matrix @ u.conj().T)), 0.0, None)
        probs = probs / probs.sum()
        table = shots.sample(probs, n, seed + k, labels=_BASIS_2Q)
        e = [x.value for x in shots.estimate_probabilities(table)]
        correlators[p1 + p2] = e[0] - e[1] - e[2] + e[3]
        singles.setdefault((0, p1), []).append(e[0] + e[1] - e[2] - e[3])
        singles.setdefault((1, p2), []).append(e[0] - e[1] + e[2] - e[3])
    mat = np.eye(4, dtype=complex)
    for p in "XYZ":
        mat += np.mean(singles[(0, p)]) * np.kron(_PAULI_MAT[p], np.eye(2))
        mat += np.mean(singles[(1, p)]) * np.kron(np.eye(2), _PAULI_MAT[p])
    for (p1, p2), value in correlators.items():
        mat += value * np.kron(_PAULI_MAT[p1], _PAULI_MAT[p2])
    return _psd_state(mat / 4.0)


def _player_reconstruction(
    player: str, noise: float, shots_mode: Union[int, str], seed: int
) -> channels.Reconstruction:
    """Tomography of the dealer-to-player map from the four standard probes."""
    idx = {"A": 0, "B": 1, "C": 2}[player]
    probe_secrets = [qss.Secret.from_name(n) for n in ("H", "V", "+", "L")]
    outputs = []
    for i, s in enumerate(probe_secrets):
        exact = qss.reduced_share(s, (idx,), noise)
        if shots_mode == "exact":
            outputs.append(exact)
        else:
            outputs.append(_sampled_qubit(exact, int(shots_mode), seed + 3 * i))
    record = channels.TomographyRecord(
        tuple(s.density() for s in probe_secrets), tuple(outputs)
    )
    return channels.reconstruct(record)


def _fnum(x) -> float:
    return float(np.real(x))


# ---------------------------------------------------------------- subcommands


def _run_reliability(cfg: RunConfig) -> Tuple[Dict[str, object], List[tuple]]:
    labels = list(qss.PROBE_SECRET_NAMES)
    secrets = [qss.Secret.from_name(n) for n in labels]
    if cfg.secret is not None and cfg.secret_label not in labels:
        labels.append(cfg.secret_label)
        secrets.append(cfg.secret)
    rows: List[list] = []
    per_secret_mean: List[float] = []
    live_fids: List[float] = []
    dead = 0
    for i, (name, secret) in enumerate(zip(labels, secrets)):
        cells = qss.recovery_cells(secret, noise=cfg.noise)
        joint = np.array([0.25 * prob for _, _, prob, _ in cells])
        sigmas = np.zeros(len(cells))
        if cfg.shots != "exact":
            table = shots.sample(
                joint / joint.sum(),
                int(cfg.shots),
                cfg.seed + i,
                labels=[f"{a}{b}:{bell}" for (a, b), bell, _, _ in cells],
            )
            est = shots.estimate_probabilities(table)
            joint = np.array([e.value for e in est])
            sigmas = np.array([e.sigma for e in est])
        fids = []
        for cell, p, s in zip(cells, joint, sigmas):
            (a, b), bell, _, fid = cell
            rows.append([name, f"{a}{b}", bell, _fnum(p), _fnum(s), None if fid is None else _fnum(fid)])
            if fid is None:
                dead += 1
            else:
                fids.append(fid)
                live_fids.append(fid)
        per_secret_mean.append(float(np.mean(fids)))
    results = {
        "cells": {
            "columns": ["secret", "branch", "outcome", "probability", "sigma", "fidelity"],
            "rows": rows,
        },
        "summary": {
            "secrets": len(labels),
            "live_cells": len(live_fids),
            "dead_cells": dead,
            "min_live_fidelity": float(np.min(live_fids)),
            "mean_live_fidelity": float(np.mean(live_fids)),
        },
    }
    figures = [
        (
            "grid",
            plotting.save_bar,
            dict(
                labels=labels,
                values=per_secret_mean,
                title="Recovery fidelity by probe secret",
                ylabel="mean fidelity over live outcomes",
                ylim=(0.0, 1.05),
                reference=2.0 / 3.0,
            ),
        )
    ]
    return results, figures


def _run_witness(cfg: RunConfig) -> Tuple[Dict[str, object], List[tuple]]:
    settings = ("ZZ", "XX", "YY")
    prob_rows: List[list] = []
    if cfg.from_probs is not None:
        estimates = {
            s: shots.expectation_from_probs(row, s) for s, row in zip(settings, cfg.from_probs)
        }
        for s, row in zip(settings, cfg.from_probs):
            for outcome, p in zip(_BASIS_2Q, row):
                prob_rows.append([s, outcome, _fnum(p), 0.0])
        w = shots.witness_from_expectations(*(estimates[s] for s in settings))
        sharing = qss.share_entangled(
            expectations=tuple(estimates[s].value for s in settings)
        )
        summary = {
            "witness": _fnum(w.value),
            "witness_sigma": _fnum(w.sigma),
            "fidelity": _fnum(sharing.fidelity),
            "fidelity_sigma": _fnum(w.sigma),
            "state_physical": sharing.rho is not None,
        }
    else:
        sharing = qss.share_entangled(noise=cfg.noise)
        setting_probs = qss.witness_setting_probabilities(sharing.rho)
        estimates = {}
        for i, s in enumerate(settings):
            probs = setting_probs[s]
            if cfg.shots == "exact":
                est_row = [shots.Estimate(_fnum(p), 0.0) for p in probs]
            else:
                table = shots.sample(
                    probs / probs.sum(), int(cfg.shots), cfg.seed + i, labels=_BASIS_2Q
                )
                est_row = shots.estimate_probabilities(table)
            for outcome, e in zip(_BASIS_2Q, est_row):
                prob_rows.append([s, outcome, _fnum(e.value), _fnum(e.sigma)])
            estimates[s] = shots.expectation_from_probs(est_row, s)
        w = shots.witness_from_expectations(*(estimates[s] for s in settings))
        summary = {
            "witness": _fnum(w.value),
            "witness_sigma": _fnum(w.sigma),
            "fidelity": 0.5 - _fnum(w.value),
            "fidelity_sigma": _fnum(w.sigma),
            "state_physical": True,
            "witness_exact": _fnum(sharing.witness),
            "fidelity_exact": _fnum(sharing.fidelity),
        }
    results = {
        "probabilities": {
            "columns": ["setting", "outcome", "probability", "sigma"],
            "rows": prob_rows,
        },
        "expectations": {
            "columns": ["setting", "value", "sigma"],
            "rows": [[s, _fnum(estimates[s].value), _fnum(estimates[s].sigma)] for s in settings],
        },
        "summary": summary,
    }
    bar_labels = ["<ZZ>", "<XX>", "<YY>", "<W>"]
    bar_values = [estimates[s].value for s in settings] + [w.value]
    bar_sigmas = [estimates[s].sigma for s in settings] + [w.sigma]
    figures = [
        (
            "witness",
            plotting.save_bar,
            dict(
                labels=bar_labels,
                values=bar_values,
                sigmas=bar_sigmas,
                title="Witness correlators",
                ylabel="expectation value",
                ylim=(-1.05, 1.05),
                reference=0.0,
            ),
        )
    ]
    return results, figures


def _run_tomography(cfg: RunConfig) -> Tuple[Dict[str, object], List[tuple]]:
    recon = _player_reconstruction(cfg.player, cfg.noise, cfg.shots, cfg.seed)
    if recon.channel is None:
        raise RuntimeError("reconstruction produced no physical channel")
    probe_names = ("H", "V", "+", "L")
    bloch_rows = []
    contractions = []
    for name in probe_names:
        s = qss.Secret.from_name(name)
        r_in = channels.bloch_vector(s.density())
        r_out = channels.bloch_vector(channels.apply(recon.channel, s.density()))
        bloch_rows.append([name] + [_fnum(x) for x in r_in] + [_fnum(x) for x in r_out])
        contractions.append(float(np.dot(r_out, r_in) / np.dot(r_in, r_in)))
    choi = channels.choi_of(recon.channel).matrix
    fid = channels.process_fidelity(recon.channel, channels.depolarizing(0.75))
    results = {
        "bloch": {
            "columns": ["probe", "in_x", "in_y", "in_z", "out_x", "out_y", "out_z"],
            "rows": bloch_rows,
        },
        "choi_real": {"labels": list(_BASIS_2Q), "matrix": np.real(choi).tolist()},
        "choi_imag": {"labels": list(_BASIS_2Q), "matrix": np.imag(choi).tolist()},
        "summary": {
            "player": cfg.player,
            "process_fidelity_vs_full_depolarizing": _fnum(fid),
            "min_choi_eigenvalue": _fnum(recon.min_choi_eigenvalue),
            "physical": recon.physical,
            "projected": recon.projected,
            "bloch_contraction": float(np.mean(contractions)),
        },
    }
    figures = [
        (
            "choi",
            plotting.save_heatmaps,
            dict(
                panels=[
                    ("Re J", list(_BASIS_2Q), np.real(choi)),
                    ("Im J", list(_BASIS_2Q), np.imag(choi)),
                ],
                title=f"Reconstructed Choi state, player {cfg.player}",
                vmin=-0.5,
                vmax=0.5,
            ),
        )
    ]
    return results, figures


def _run_discriminate(cfg: RunConfig) -> Tuple[Dict[str, object], List[tuple]]:
    names = list(cfg.secret_names)
    secrets = [qss.Secret.from_name(n) for n in names]
    results: Dict[str, object] = {}
    panels = []
    off_diag: List[float] = []
    if cfg.shots == "exact":
        report = qss.confidentiality_report(names, noise=cfg.noise)
        grids = {pair: report.pair_tables[pair].P for pair in ("AB", "BC", "AC")}
    else:
        grids = {}
        counter = 0
        for pair, keep in (("AB", (0, 1)), ("BC", (1, 2)), ("AC", (0, 2))):
            estimates = []
            for s in secrets:
                exact = qss.reduced_share(s, keep, cfg.noise)
                estimates.append(_sampled_two_qubits(exact, int(cfg.shots), cfg.seed + counter))
                counter += 9
            m = len(estimates)
            P = np.full((m, m), 0.5)
            for i in range(m):
                for j in range(i + 1, m):
                    P[i, j] = P[j, i] = qss.min_error_probability(estimates[i], estimates[j])
            grids[pair] = qss.DiscriminationTable(tuple(names), P).P
    for pair in ("AB", "BC", "AC"):
        mat = np.asarray(grids[pair], dtype=float)
        results[f"grid_{pair}"] = {"labels": names, "matrix": mat.tolist()}
        panels.append((pair, names, mat))
        off_diag.extend(mat[~np.eye(len(names), dtype=bool)].tolist())
    player_rows = []
    for player in ("A", "B", "C"):
        recon = _player_reconstruction(
            player, cfg.noise, cfg.shots, cfg.seed + 1000 + 12 * "ABC".index(player)
        )
        fid = channels.process_fidelity(recon.channel, channels.depolarizing(0.75))
        player_rows.append([player, _fnum(fid), _fnum(recon.min_choi_eigenvalue)])
    results["players"] = {
        "columns": ["player", "process_fidelity_vs_full_depolarizing", "min_choi_eigenvalue"],
        "rows": player_rows,
    }
    results["summary"] = {
        "n_secrets": len(names),
        "off_diagonal_min": float(np.min(off_diag)),
        "off_diagonal_max": float(np.max(off_diag)),
    }
    figures = [
        (
            "grids",
            plotting.save_heatmaps,
            dict(
                panels=panels,
                title="Minimum-error discrimination per player pair",
                vmin=0.0,
                vmax=0.5,
            ),
        )
    ]
    return results, figures


def _run_erasure(cfg: RunConfig) -> Tuple[Dict[str, object], List[tuple]]:
    secret = cfg.secret if cfg.secret is not None else qss.Secret.from_name("+")
    psi = code5.encode5(secret.alpha, secret.beta)
    target = secret.ket()
    spec = code5.ErasureSpec(cfg.erase)
    branch_rows = [
        [bits, _fnum(prob)] for bits, prob, _ in code5.erasure_branches(psi, spec)
    ]

    def recovered_fidelity(s: code5.ErasureSpec) -> Tuple[float, int]:
        ch = code5.synthesize_recovery(s)
        out = channels.apply(ch, code5.erase(psi, s))
        return _fnum(fidelity(out, target)), len(ch.kraus)

    main_fid, n_kraus = recovered_fidelity(spec)
    patterns = [(q,) for q in range(5)] + list(itertools.combinations(range(5), 2))
    sweep_rows = []
    for pat in patterns:
        label = "".join(str(q) for q in pat)
        fid, _ = recovered_fidelity(code5.ErasureSpec(pat))
        sweep_rows.append([label, fid])
    results = {
        "branches": {"columns": ["bits", "probability"], "rows": branch_rows},
        "sweep": {"columns": ["pattern", "fidelity"], "rows": sweep_rows},
        "summary": {
            "pattern": "".join(str(q) for q in cfg.erase),
            "recovered_fidelity": main_fid,
            "n_recovery_kraus": n_kraus,
            "min_sweep_fidelity": float(min(f for _, f in sweep_rows)),
        },
    }
    figures = [
        (
            "sweep",
            plotting.save_bar,
            dict(
                labels=[r[0] for r in sweep_rows],
                values=[r[1] for r in sweep_rows],
                title="Recovery fidelity by erased positions",
                ylabel="fidelity",
                ylim=(0.0, 1.05),
            ),
        )
    ]
    return results, figures


def _run_kl_check(cfg: RunConfig) -> Tuple[Dict[str, object], List[tuple]]:
    basis = code5.logical_basis()
    wle2 = code5.pauli_labels_up_to_weight(2)
    wle1 = code5.pauli_labels_up_to_weight(1)
    product_worst = 0.0
    for label in wle2:
        res = code5.kl_check(basis, ["IIIII", label])
        product_worst = max(product_worst, res.worst_violation)
    pairwise = code5.kl_check(basis, wle1)
    class_rows = [
        ["error_products_weight_le2", len(wle2), _fnum(product_worst), bool(product_worst <= 1e-10)],
        ["errors_weight_le1_pairwise", len(wle1), _fnum(pairwise.worst_violation), bool(pairwise.passes)],
    ]
    w3_rows = []
    for label in code5.random_weight3_labels(cfg.draws, cfg.seed):
        res = code5.kl_check(basis, wle2 + [label])
        w3_rows.append([label, _fnum(res.worst_violation)])
    min_w3 = float(min(v for _, v in w3_rows))
    results = {
        "classes": {
            "columns": ["class", "n_operators", "worst_violation", "passes"],
            "rows": class_rows,
        },
        "weight3": {"columns": ["label", "violation"], "rows": w3_rows},
        "summary": {
            "draws": cfg.draws,
            "min_weight3_violation": min_w3,
            "all_weight3_detected": bool(min_w3 >= 1e-3),
        },
    }
    ordered = sorted(w3_rows, key=lambda r: -r[1])
    figures = [
        (
            "violations",
            plotting.save_bar,
            dict(
                labels=[r[0] for r in ordered],
                values=[r[1] for r in ordered],
                title="Condition violation for sampled weight-3 errors",
                ylabel="worst violation",
                xrotation=90,
            ),
        )
    ]
    return results, figures


def _run_circuit_check(cfg: RunConfig) -> Tuple[Dict[str, object], List[tuple]]:
    if cfg.secret is not None:
        labelled = [(cfg.secret_label, cfg.secret)]
    else:
        labelled = [(n, qss.Secret.from_name(n)) for n in qss.PROBE_SECRET_NAMES]
    rows = []
    per_secret_min = []
    for name, secret in labelled:
        share = qss.encode_secret(secret)
        fids = []
        for (a, b) in qss.BRANCH_LABELS:
            fid = _fnum(fidelity(qss.encode_via_circuit(secret, a, b), share.branch(a, b)))
            prob = _fnum(qss.circuit_branch_probability(secret, a, b))
            rows.append([name, a, b, fid, prob])
            fids.append(fid)
        per_secret_min.append(float(np.min(fids)))
    decomp_err = float(
        np.max(np.abs(gate("CXZ").matrix - cxz_decomposed().matrix))
    )
    results = {
        "branches": {
            "columns": ["secret", "a", "b", "fidelity", "postselect_probability"],
            "rows": rows,
        },
        "summary": {
            "n_secrets": len(labelled),
            "min_fidelity": float(np.min(per_secret_min)),
            "max_postselect_deviation": float(max(abs(r[4] - 0.5) for r in rows)),
            "entangler_decomposition_max_error": decomp_err,
        },
    }
    figures = [
        (
            "fidelity",
            plotting.save_bar,
            dict(
                labels=[n for n, _ in labelled],
                values=per_secret_min,
                title="Gate-level encoder vs direct branches",
                ylabel="min branch fidelity",
                ylim=(0.0, 1.05),
            ),
        )
    ]
    return results, figures


_RUNNERS = {
    "reliability": _run_reliability,
    "witness": _run_witness,
    "tomography": _run_tomography,
    "discriminate": _run_discriminate,
    "erasure": _run_erasure,
    "kl-check": _run_kl_check,
    "circuit-check": _run_circuit_check,
}


# ---------------------------------------------------------------- report IO


def run(config: RunConfig) -> Report:
    """Execute one subcommand and render its figures; nothing is written yet."""
    results, figure_specs = _RUNNERS[config.subcommand](config)
    stem = str(Path(config.out).with_suffix(""))
    figure_files: List[str] = []
    if not config.no_plot:
        for name, fn, kwargs in figure_specs:
            path = f"{stem}.{name}.png"
            fn(path, **kwargs)
            figure_files.append(Path(path).name)
    provenance = {
        "tool": "qss3",
        "version": __version__,
        "seed": config.seed,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    return Report(config.echo(), results, figure_files, provenance)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    return obj


def _is_table(block) -> bool:
    return isinstance(block, dict) and set(block) == {"columns", "rows"}


def _is_matrix(block) -> bool:
    return isinstance(block, dict) and set(block) == {"labels", "matrix"}


def write_report(report: Report, config: RunConfig) -> List[str]:
    """Write the report per the configured format; returns files written."""
    out = Path(config.out)
    if config.fmt == "json":
        out.write_text(json.dumps(_plain(report.as_dict()), sort_keys=True, indent=2) + "\n")
        return [str(out)]
    stem = out.with_suffix("")
    written = [str(out)]
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["section", "key", "value"])
        for key, value in report.config.items():
            if value is None or isinstance(value, (str, int, float, bool)):
                writer.writerow(["config", key, "" if value is None else value])
            else:
                writer.writerow(["config", key, json.dumps(_plain(value), sort_keys=True)])
        for key, value in report.provenance.items():
            writer.writerow(["provenance", key, value])
        for name, block in report.results.items():
            if _is_table(block) or _is_matrix(block):
                writer.writerow([f"results.{name}", "file", f"{stem.name}.{name}.csv"])
            else:
                for key, value in block.items():
                    writer.writerow([f"results.{name}", key, _plain(value)])
        for i, fig in enumerate(report.figures):
            writer.writerow(["figures", str(i), fig])
    for name, block in report.results.items():
        if not (_is_table(block) or _is_matrix(block)):
            continue
        path = Path(f"{stem}.{name}.csv")
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            if _is_table(block):
                writer.writerow(block["columns"])
                for row in block["rows"]:
                    writer.writerow(["" if v is None else _plain(v) for v in row])
            else:
                writer.writerow([""] + list(block["labels"]))
                for label, row in zip(block["labels"], block["matrix"]):
                    writer.writerow([label] + [_plain(v) for v in row])
        written.append(str(path))
    return written


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        if code is None:
            return 0
        return code if isinstance(code, int) else 2
    try:
        config = _config_from_args(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        report = run(config)
        written = write_report(report, config)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {', '.join(written)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
