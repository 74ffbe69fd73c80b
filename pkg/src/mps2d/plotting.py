"""Matplotlib rendering of tension curves and mode densities to image files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_scan_plot(scan_result, path, certificates=None):
    """Semilog plot of the tension curve; higher generalized eigenvalues are
    drawn lighter above the lowest.  Certified minima, when given, are marked."""
    fig, ax = plt.subplots(figsize=(8.0, 3.2))
    e = scan_result.energies
    ax.semilogy(e, scan_result.tensions, color="C0", lw=1.2, label="min tension")
    higher = scan_result.higher_tensions
    for idx in range(higher.shape[1]):
        ax.semilogy(e, higher[:, idx], color="C0", lw=0.7, alpha=0.35)
    if certificates:
        stars = [c.e_star for c in certificates]
        vals = [max(c.t_star, 1e-300) for c in certificates]
        ax.semilogy(stars, vals, "v", color="C3", ms=5, label="certified minima")
    ax.set_xlabel("E")
    ax.set_ylabel("tension")
    ax.set_xlim(e[0], e[-1])
    if certificates:
        ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_mode_plot(mode_grid, path):
    """Density plot of |v|^2 on the mode grid; exterior cells stay blank."""
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    masked = np.ma.masked_invalid(mode_grid.values)
    ax.imshow(masked, origin="lower", extent=mode_grid.extent, cmap="inferno",
              interpolation="nearest")
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(f"|v|^2 at E = {mode_grid.e_star:.9g}", fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
