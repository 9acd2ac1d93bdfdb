"""Figure rendering for the report pipeline.

All functions draw to files through the Agg backend and return the written
path, so they are safe in headless runs. Inputs are plain arrays and report
objects; nothing here recomputes mathematics.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_DPI = 130


def _finish(fig, path) -> Path:
    out = Path(path)
    fig.savefig(out, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    return out


def dimension_figure(levels, traces, closed, path) -> Path:
    """Bar chart of trace-quadrature dimensions against the closed formula."""
    levels = list(levels)
    x = np.arange(len(levels))
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    ax.bar(x - 0.18, traces, width=0.36, label="trace quadrature")
    ax.bar(x + 0.18, closed, width=0.36, label="closed formula")
    ax.set_xticks(x, [str(l) for l in levels])
    ax.set_xlabel("level l")
    ax.set_ylabel("eigenspace dimension")
    ax.legend(frameon=False)
    return _finish(fig, path)


def selberg_figure(h, path) -> Path:
    """Heatmap of the radial-transform matrix deviation from the identity."""
    h = np.asarray(h)
    gap = np.abs(h - np.eye(h.shape[0]))
    fig, ax = plt.subplots(figsize=(4.4, 3.8))
    image = ax.imshow(np.log10(gap + 1e-18), cmap="viridis")
    fig.colorbar(image, ax=ax, label="log10 |h - I|")
    ax.set_xlabel("column j")
    ax.set_ylabel("row l")
    return _finish(fig, path)


def spectrum_figure(report, path) -> Path:
    """Computed eigenvalues against the exact level ladder."""
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    eigs = np.asarray(report.eigenvalues)
    ax.plot(np.arange(len(eigs)), eigs, "o", label=f"grid N = {report.size}")
    for k, target in enumerate(report.targets):
        ax.axhline(target, color="gray", lw=0.8, ls="--",
                   label="exact levels" if k == 0 else None)
    ax.set_xlabel("eigenvalue index")
    ax.set_ylabel("eigenvalue")
    ax.legend(frameon=False)
    return _finish(fig, path)


def kernel_figure(grid_x, grid_y, magnitudes, path, label="|K(z, w0)|") -> Path:
    """Heatmap of kernel magnitude over the fundamental cell."""
    fig, ax = plt.subplots(figsize=(4.6, 3.8))
    image = ax.pcolormesh(grid_x, grid_y, magnitudes, shading="auto", cmap="magma")
    fig.colorbar(image, ax=ax, label=label)
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.set_aspect("equal")
    return _finish(fig, path)
