"""Wall-clock per-pixel cost of each beamformer as the array grows."""

from __future__ import annotations

import statistics
import time

import numpy as np

from .beamformers import METHODS, reconstruct
from .geometry import ImageGrid, SensorArray
from .phantom import PointAbsorber, simulate
from .signal import analytic_signal


def run_bench(sweep, config, repeats: int = 5, pixels: tuple[int, int] = (16, 16),
              methods=METHODS) -> list[dict]:
    """Time ``reconstruct`` for each element count in ``sweep``.

    A single absorber at 30 mm depth is imaged on a small grid around it.
    Beamformer defaults (L, L_D, loading) follow each M unless the config pins
    them. Returns one row per (M, method) with the median seconds per pixel.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    target = PointAbsorber(0.0, 30e-3)
    grid = ImageGrid(-0.5e-3, 0.5e-3, 29.5e-3, 30.5e-3, *pixels)
    n_pix = pixels[0] * pixels[1]
    bf = config.beamformer_config()
    rows = []
    for M in sweep:
        array = SensorArray(int(M), config.array.pitch)
        data = analytic_signal(simulate([target], array, config.pulse_model(), config.sound_speed,
                                        config.sampling_rate, config.duration))
        for method in methods:
            reconstruct(data, grid, array, bf, method)  # warm-up
        # interleave methods inside each round so slow drift hits all of them alike
        times = {m: [] for m in methods}
        for _ in range(repeats):
            for method in methods:
                t0 = time.perf_counter()
                reconstruct(data, grid, array, bf, method)
                times[method].append(time.perf_counter() - t0)
        for method in methods:
            rows.append({
                "elements": int(M),
                "method": method,
                "median_s_per_pixel": statistics.median(times[method]) / n_pix,
                "pixels": n_pix,
                "repeats": repeats,
            })
    return rows


def loglog_slope(rows, method: str) -> float:
    """Least-squares slope of log(time) against log(M) for one method."""
    pts = sorted((r["elements"], r["median_s_per_pixel"]) for r in rows if r["method"] == method)
    M, t = np.log(np.array(pts)).T
    return float(np.polyfit(M, t, 1)[0])
