"""Array and image-grid geometry, receive-path delays and delayed snapshots.

Delays are one-way (absorber to element), as in photoacoustic receive-only
imaging. Delay-and-sum averages all M elements; a statement of the sum
with upper limit M-1 is read as a typo, since every other use of the array
covers all M.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import OutOfRange


@dataclass(frozen=True)
class SensorArray:
    """Uniform linear array on the z = 0 line, centred on lateral 0."""

    element_count: int
    pitch: float

    def __post_init__(self):
        if int(self.element_count) != self.element_count or self.element_count < 4:
            raise ValueError(f"element_count must be an integer >= 4, got {self.element_count}")
        if not self.pitch > 0:
            raise ValueError(f"pitch must be positive, got {self.pitch}")

    @property
    def element_positions(self) -> np.ndarray:
        m = np.arange(self.element_count, dtype=float)
        return (m - (self.element_count - 1) / 2.0) * self.pitch

    @property
    def aperture(self) -> float:
        return (self.element_count - 1) * self.pitch


@dataclass(frozen=True)
class ImageGrid:
    """Regular lateral x axial pixel grid; corner pixels sit on the extents."""

    lateral_min: float
    lateral_max: float
    axial_min: float
    axial_max: float
    lateral_count: int
    axial_count: int

    def __post_init__(self):
        if self.axial_min <= 0:
            raise ValueError("axial_min must be > 0 (pixels in front of the array)")
        if self.lateral_count < 1 or self.axial_count < 1:
            raise ValueError("pixel counts must be positive")
        if self.lateral_max < self.lateral_min or self.axial_max < self.axial_min:
            raise ValueError("extent max must not be below min")
        if self.lateral_count == 1 and self.lateral_max != self.lateral_min:
            raise ValueError("a single lateral pixel needs lateral_min == lateral_max")
        if self.axial_count == 1 and self.axial_max != self.axial_min:
            raise ValueError("a single axial pixel needs axial_min == axial_max")

    @classmethod
    def from_pitch(cls, lateral_extent, axial_extent, lateral_pitch, axial_pitch):
        """Grid covering the extents with (approximately) the requested pitches."""
        nx = int(round((lateral_extent[1] - lateral_extent[0]) / lateral_pitch)) + 1
        nz = int(round((axial_extent[1] - axial_extent[0]) / axial_pitch)) + 1
        return cls(lateral_extent[0], lateral_extent[1], axial_extent[0], axial_extent[1], nx, nz)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.lateral_count, self.axial_count)

    @property
    def lateral(self) -> np.ndarray:
        return np.linspace(self.lateral_min, self.lateral_max, self.lateral_count)

    @property
    def axial(self) -> np.ndarray:
        return np.linspace(self.axial_min, self.axial_max, self.axial_count)

    @property
    def lateral_pitch(self) -> float:
        if self.lateral_count == 1:
            return 0.0
        return (self.lateral_max - self.lateral_min) / (self.lateral_count - 1)

    @property
    def axial_pitch(self) -> float:
        if self.axial_count == 1:
            return 0.0
        return (self.axial_max - self.axial_min) / (self.axial_count - 1)

    def pixel(self, i: int, j: int) -> tuple[float, float]:
        """(lateral, axial) coordinate of pixel (i, j)."""
        return float(self.lateral[i]), float(self.axial[j])

    def to_dict(self) -> dict:
        return {
            "lateral_min": self.lateral_min,
            "lateral_max": self.lateral_max,
            "axial_min": self.axial_min,
            "axial_max": self.axial_max,
            "lateral_count": self.lateral_count,
            "axial_count": self.axial_count,
        }


@dataclass(frozen=True)
class DelayTable:
    """Per-pixel, per-element delays in fractional samples.

    ``delays`` has shape ``(lateral_count, axial_count, M)`` and is read-only.
    """

    delays: np.ndarray = field(repr=False)
    sampling_rate: float
    sound_speed: float

    def __post_init__(self):
        self.delays.flags.writeable = False

    def __getitem__(self, pixel) -> np.ndarray:
        return self.delays[pixel]


def compute_delays(grid: ImageGrid, array: SensorArray, sound_speed: float,
                   sampling_rate: float) -> DelayTable:
    """One-way receive delays ``|r_pixel - r_m| * fs / c`` for every pixel and element."""
    if not sound_speed > 0:
        raise ValueError("sound_speed must be positive")
    if not sampling_rate > 0:
        raise ValueError("sampling_rate must be positive")
    x = grid.lateral[:, None, None]
    z = grid.axial[None, :, None]
    xe = array.element_positions[None, None, :]
    dist = np.sqrt((x - xe) ** 2 + z ** 2)
    return DelayTable(dist * (sampling_rate / sound_speed), sampling_rate, sound_speed)


def interpolate_channels(samples: np.ndarray, delays: np.ndarray) -> np.ndarray:
    """Linearly interpolate every channel at fractional sample positions.

    Parameters
    ----------
    samples : ndarray, shape (M, T)
        Channel data (real or complex).
    delays : ndarray, shape (..., M)
        Fractional sample index per channel. Must lie in ``[0, T - 2]``.

    Returns
    -------
    ndarray, shape (..., M)
    """
    T = samples.shape[1]
    delays = np.asarray(delays, dtype=float)
    if delays.size and (delays.min() < 0 or delays.max() > T - 2):
        raise OutOfRange(
            f"delay range [{delays.min():.3f}, {delays.max():.3f}] outside [0, {T - 2}]"
        )
    idx = np.floor(delays).astype(np.intp)
    frac = delays - idx
    m = np.arange(samples.shape[0])
    lo = samples[m, idx]
    hi = samples[m, idx + 1]
    return lo * (1.0 - frac) + hi * frac


def extract_delayed_snapshot(data, delays: DelayTable, pixel) -> np.ndarray:
    """Delayed array snapshot for one pixel, a length-M complex vector.

    ``data`` is an AnalyticDataset (or anything with a ``samples`` array of
    shape (M, T)); ``pixel`` is an ``(i, j)`` index into the grid.
    """
    return interpolate_channels(data.samples, delays[tuple(pixel)])
