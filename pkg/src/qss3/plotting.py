"""Small matplotlib helpers for the report figures."""

from __future__ import annotations

from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["save_bar", "save_heatmaps"]


def save_bar(
    path: str,
    labels: Sequence[str],
    values: Sequence[float],
    *,
    title: str,
    ylabel: str,
    sigmas: Optional[Sequence[float]] = None,
    ylim: Optional[tuple] = None,
    reference: Optional[float] = None,
    xrotation: int = 0,
) -> str:
    """Bar chart with optional error bars and a dashed reference line."""
    fig, ax = plt.subplots(figsize=(min(12.0, max(4.0, 0.8 * len(labels) + 1.5)), 3.2))
    xs = np.arange(len(labels))
    ax.bar(xs, values, color="#4878cf", yerr=sigmas, capsize=3 if sigmas is not None else 0)
    if reference is not None:
        ax.axhline(reference, color="crimson", linestyle="--", linewidth=1)
    ax.set_xticks(xs)
    ax.set_xticklabels(labels, rotation=xrotation, fontsize=8 if len(labels) > 12 else None)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if ylim is not None:
        ax.set_ylim(*ylim)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_heatmaps(
    path: str,
    panels: Sequence[tuple],
    *,
    title: str,
    vmin: float = 0.0,
    vmax: float = 0.5,
    annotate: bool = True,
) -> str:
    """Row of annotated heatmaps; panels are (name, row_labels, matrix)."""
    n = len(panels)
    fig, axes = plt.subplots(1, n, figsize=(3.4 * n, 3.2), squeeze=False)
    for ax, (name, labels, matrix) in zip(axes[0], panels):
        mat = np.asarray(matrix, dtype=float)
        im = ax.imshow(mat, vmin=vmin, vmax=vmax, cmap="viridis")
        ax.set_title(name)
        ax.set_xticks(range(len(labels)))
        ax.set_xticklabels(labels)
        ax.set_yticks(range(len(labels)))
        ax.set_yticklabels(labels)
        if annotate and len(labels) <= 8:
            mid = 0.5 * (vmin + vmax)
            for i in range(mat.shape[0]):
                for j in range(mat.shape[1]):
                    color = "white" if mat[i, j] < mid else "black"
                    ax.text(j, i, f"{mat[i, j]:.2f}", ha="center", va="center", color=color, fontsize=7)
        fig.colorbar(im, ax=ax, fraction=0.046)
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
