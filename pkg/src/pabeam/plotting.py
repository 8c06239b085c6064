"""Matplotlib figures written next to the CSV/JSON reports."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {"das": ("tab:blue", "--"), "mv": ("tab:orange", "-."), "dmv": ("tab:green", "-")}
LABELS = {"das": "DAS", "mv": "MV", "dmv": "D-MV"}


def plot_profiles(profiles, path, floor_db=-60.0):
    """One panel per depth, one line per method; ``profiles[depth][method]`` is a LateralProfile."""
    depths = list(profiles)
    ncols = min(3, len(depths))
    nrows = math.ceil(len(depths) / ncols)
    fig, axes = plt.subplots(nrows, ncols, figsize=(4.2 * ncols, 3.2 * nrows), squeeze=False)
    for ax, depth in zip(axes.flat, depths):
        for method, prof in profiles[depth].items():
            color, ls = STYLE.get(method, (None, "-"))
            ax.plot(prof.lateral * 1e3, np.maximum(prof.db, floor_db), color=color, ls=ls,
                    label=LABELS.get(method, method))
        ax.set_title(f"{depth * 1e3:g} mm")
        ax.set_xlabel("lateral (mm)")
        ax.set_ylabel("amplitude (dB)")
        ax.set_ylim(floor_db, 2)
        ax.grid(alpha=0.3)
    for ax in list(axes.flat)[len(depths):]:
        ax.set_visible(False)
    axes.flat[0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_bench(rows, path):
    """Log-log per-pixel time against element count, one line per method."""
    fig, ax = plt.subplots(figsize=(5, 3.8))
    for method in ("das", "mv", "dmv"):
        pts = sorted((r["elements"], r["median_s_per_pixel"]) for r in rows if r["method"] == method)
        if not pts:
            continue
        M, t = zip(*pts)
        color, ls = STYLE[method]
        ax.loglog(M, np.array(t) * 1e6, marker="o", color=color, ls=ls, label=LABELS[method])
    ax.set_xlabel("elements M")
    ax.set_ylabel("time per pixel (µs)")
    ax.grid(alpha=0.3, which="both")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_image(image, path, dynamic_range_db=40.0):
    """Log-compressed image with physical axes."""
    g = image.grid
    fig, ax = plt.subplots(figsize=(4, 6))
    extent = [g.lateral_min * 1e3, g.lateral_max * 1e3, g.axial_max * 1e3, g.axial_min * 1e3]
    ax.imshow(image.values.T, cmap="gray", vmin=-dynamic_range_db, vmax=0, extent=extent,
              aspect="auto")
    ax.set_xlabel("lateral (mm)")
    ax.set_ylabel("axial (mm)")
    ax.set_title(LABELS.get(image.method, image.method))
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
