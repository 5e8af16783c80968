"""Matplotlib figures for the CLI report paths (Agg backend, files only)."""

from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FAMILY_MARKERS = ("o", "s", "^", "D", "v", "P", "X", "*")


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    return path


def loss_curves(log: List[Dict[str, float]], path) -> Path:
    """Training loss and validation criterion per epoch."""
    epochs = [row["epoch"] for row in log]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 3.5))
    ax1.plot(epochs, [row["total"] for row in log], label="total")
    ax1.plot(epochs, [-row["recon"] for row in log], label="-recon", alpha=0.7)
    ax1.plot(epochs, [row["ce_timbre"] for row in log], label="ce_timbre", alpha=0.7)
    ax1.set_yscale("symlog")
    ax1.set_xlabel("epoch")
    ax1.set_title("training loss")
    ax1.legend(fontsize=8)
    ax2.plot(epochs, [row["val_criterion"] for row in log], color="tab:green")
    ax2.set_xlabel("epoch")
    ax2.set_title("validation criterion")
    return _save(fig, path)


def confusion(cm: np.ndarray, names: Sequence[str], path) -> Path:
    cm = np.asarray(cm)
    n = cm.shape[0]
    fig, ax = plt.subplots(figsize=(0.45 * n + 2.5, 0.45 * n + 2))
    ax.imshow(cm, cmap="Blues")
    short = [s.split("/")[-1] for s in names] if len(names) == n else [str(i) for i in range(n)]
    ax.set_xticks(range(n), short, rotation=90, fontsize=7)
    ax.set_yticks(range(n), short, fontsize=7)
    for i in range(n):
        for j in range(n):
            if cm[i, j]:
                ax.text(j, i, str(int(cm[i, j])), ha="center", va="center", fontsize=6)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    return _save(fig, path)


def embedding_scatter(
    points: np.ndarray,
    labels: Sequence[int],
    families: Sequence[int],
    prior_means: np.ndarray,
    path,
    title: str = "",
    boundary_radius: Optional[float] = None,
) -> Path:
    """2-D scatter of posterior means coloured by instrument, marked by family; priors drawn as crosses.

    Hyperbolic coordinates should already be mapped to the Poincare disk;
    ``boundary_radius`` then draws the disk boundary.
    """
    points = np.asarray(points)
    labels = np.asarray(labels)
    cmap = plt.get_cmap("tab20")
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    for j in np.unique(labels):
        sel = labels == j
        ax.scatter(points[sel, 0], points[sel, 1], s=10, color=cmap(j % 20), marker=FAMILY_MARKERS[families[j] % len(FAMILY_MARKERS)], alpha=0.7)
    pm = np.asarray(prior_means)
    ax.scatter(pm[:, 0], pm[:, 1], s=80, c=[cmap(j % 20) for j in range(len(pm))], marker="X", edgecolors="k")
    if boundary_radius is not None:
        ax.add_patch(plt.Circle((0, 0), boundary_radius, fill=False, color="0.5", lw=0.8))
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    return _save(fig, path)


def sweep_heatmap(table: np.ndarray, row_labels: Sequence[str], col_labels: Sequence[str], title: str, path) -> Path:
    table = np.asarray(table, dtype=float)
    fig, ax = plt.subplots(figsize=(1.3 * len(col_labels) + 2.5, 0.6 * len(row_labels) + 1.5))
    ax.imshow(np.ma.masked_invalid(table), cmap="viridis", aspect="auto")
    ax.set_xticks(range(len(col_labels)), col_labels)
    ax.set_yticks(range(len(row_labels)), row_labels)
    for i in range(table.shape[0]):
        for j in range(table.shape[1]):
            ax.text(j, i, f"{table[i, j]:.3g}", ha="center", va="center", color="w", fontsize=9)
    ax.set_title(title)
    return _save(fig, path)


def mel_image(mel: np.ndarray, path, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(4, 4))
    ax.imshow(np.asarray(mel), origin="lower", aspect="auto", cmap="magma")
    ax.set_xlabel("frame")
    ax.set_ylabel("mel band")
    if title:
        ax.set_title(title)
    return _save(fig, path)
