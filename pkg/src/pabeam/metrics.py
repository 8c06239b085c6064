"""Lateral profiles, -6 dB FWHM and image SNR for point-target images."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConstantImage, GridMismatch, NoCrossing, OutOfExtent, PabeamError
from .signal import ImagePlane


@dataclass(frozen=True)
class LateralProfile:
    """One grid row of an envelope image.

    ``depth`` is the axial coordinate of the row actually used; ``db`` is
    relative to the row's own maximum and floored at -100 dB.
    """

    depth: float
    lateral: np.ndarray = field(repr=False)
    linear: np.ndarray = field(repr=False)

    @property
    def db(self) -> np.ndarray:
        peak = self.linear.max()
        with np.errstate(divide="ignore"):
            return np.maximum(20.0 * np.log10(self.linear / peak), -100.0)


def _linear_values(image) -> np.ndarray:
    if isinstance(image, ImagePlane):
        if image.stage == "log_compressed":
            return 10.0 ** (image.values / 20.0)
        if image.stage == "beamformed":
            return np.abs(image.values)
        return image.values
    return np.asarray(image, dtype=float)


def lateral_profile(image: ImagePlane, depth: float) -> LateralProfile:
    """Row of ``image`` nearest to ``depth``; exact ties go to the shallower row."""
    z = image.grid.axial
    tol = 1e-9 * max(abs(z[-1]), 1.0)
    if depth < z[0] - tol or depth > z[-1] + tol:
        raise OutOfExtent(f"depth {depth} outside axial extent [{z[0]}, {z[-1]}]")
    row = int(np.argmin(np.abs(z - depth)))
    values = _linear_values(image)[:, row]
    if not values.max() > 0:
        raise PabeamError(f"profile at depth {z[row]} has no positive value")
    return LateralProfile(float(z[row]), image.grid.lateral, np.array(values, dtype=float))


def fwhm(profile: LateralProfile) -> float:
    """Full width at half the peak amplitude, in the units of ``profile.lateral``.

    Each half-maximum crossing is located by linear interpolation between the
    two samples that bracket it, walking outward from the global peak.

    Raises
    ------
    NoCrossing
        If the peak sits on the profile boundary or the profile does not fall
        below half maximum on both sides.
    """
    x, v = profile.lateral, profile.linear
    i = int(np.argmax(v))
    half = v[i] / 2.0
    if i == 0 or i == v.size - 1:
        raise NoCrossing("profile peak lies on the boundary")

    below = np.flatnonzero(v[:i] < half)
    if below.size == 0:
        raise NoCrossing("profile stays above half maximum left of the peak")
    lo = below[-1]
    left = x[lo] + (half - v[lo]) / (v[lo + 1] - v[lo]) * (x[lo + 1] - x[lo])

    below = np.flatnonzero(v[i + 1:] < half)
    if below.size == 0:
        raise NoCrossing("profile stays above half maximum right of the peak")
    hi = i + 1 + below[0]
    right = x[hi - 1] + (half - v[hi - 1]) / (v[hi] - v[hi - 1]) * (x[hi] - x[hi - 1])
    return float(right - left)


def snr_metric(image) -> float:
    """``20 log10((max - min) / std)`` over all pixels of the linear envelope."""
    v = _linear_values(image)
    spread = float(v.max() - v.min())
    sd = float(v.std())
    if sd == 0:
        raise ConstantImage("SNR undefined for a constant image")
    return 20.0 * math.log10(spread / sd)


def crop_axial(image: ImagePlane, centre: float, height: float) -> np.ndarray:
    """Linear pixel values of rows within ``height / 2`` of ``centre``."""
    z = image.grid.axial
    tol = 1e-9 * max(abs(z[-1]), 1.0)
    rows = np.abs(z - centre) <= height / 2.0 + tol
    if not rows.any():
        raise OutOfExtent(f"no rows within {height / 2} of depth {centre}")
    return _linear_values(image)[:, rows]


@dataclass
class TargetMetrics:
    method: str
    depth_mm: float
    fwhm_um: float | None
    snr_db: float | None
    flag: str = ""


@dataclass
class MetricsReport:
    """Per-method, per-depth FWHM and SNR plus the FWHM spread over depths."""

    rows: list[TargetMetrics]
    spread_um: dict[str, float | None]
    flagged_pixels: dict[str, int]
    band_mm: float
    config: dict = field(default_factory=dict)

    def for_method(self, method: str) -> list[TargetMetrics]:
        return [r for r in self.rows if r.method == method]

    def to_dict(self) -> dict:
        return {
            "band_mm": self.band_mm,
            "spread_um": dict(self.spread_um),
            "flagged_pixels": dict(self.flagged_pixels),
            "rows": [asdict(r) for r in self.rows],
            "config": self.config,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        return cls(
            rows=[TargetMetrics(**r) for r in d["rows"]],
            spread_um=dict(d["spread_um"]),
            flagged_pixels={k: int(v) for k, v in d["flagged_pixels"].items()},
            band_mm=d["band_mm"],
            config=d.get("config", {}),
        )


def depth_sweep_report(images: dict[str, ImagePlane], depths, band: float = 5e-3,
                       config: dict | None = None) -> MetricsReport:
    """FWHM and banded SNR at each target depth for each method's envelope image.

    SNR is computed on an axial band of height ``band`` centred on the target
    over the full lateral extent. Metric failures are recorded as ``None``
    with a flag instead of raising.
    """
    grids = {m: im.grid for m, im in images.items()}
    if len(set(grids.values())) > 1:
        raise GridMismatch("all images must share one grid")

    rows = []
    spread = {}
    for method, image in images.items():
        widths = []
        for depth in depths:
            flag = []
            try:
                width = fwhm(lateral_profile(image, depth)) * 1e6
                widths.append(width)
            except PabeamError as exc:
                width = None
                flag.append(f"fwhm: {exc}")
            try:
                snr = snr_metric(crop_axial(image, depth, band))
            except PabeamError as exc:
                snr = None
                flag.append(f"snr: {exc}")
            rows.append(TargetMetrics(method, round(depth * 1e3, 9), width, snr, "; ".join(flag)))
        spread[method] = (max(widths) - min(widths)) if widths else None
    flagged = {m: int(im.flagged) for m, im in images.items()}
    return MetricsReport(rows, spread, flagged, band * 1e3, dict(config or {}))
