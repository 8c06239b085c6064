"""Analytic point-source forward model for photoacoustic channel data.

Each absorber radiates a Gaussian-modulated sinusoid from its centre at
t = 0. An element at distance d receives it delayed by d / c and scaled by
1 / max(d, 1 mm). No attenuation, dispersion or finite-size effects.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import gausspulse

from .errors import DurationTooShort
from .geometry import SensorArray
from .signal import ChannelDataset

NEAR_FIELD_CLAMP = 1e-3


@dataclass(frozen=True)
class PointAbsorber:
    lateral: float
    axial: float
    amplitude: float = 1.0
    radius: float = 1e-4  # metadata only

    def __post_init__(self):
        if not self.axial > 0:
            raise ValueError("absorber must lie in front of the array (axial > 0)")
        if not self.amplitude > 0:
            raise ValueError("absorber amplitude must be positive")


@dataclass(frozen=True)
class PulseModel:
    """Gaussian-modulated sinusoid with the given -6 dB fractional bandwidth."""

    center_frequency: float = 5e6
    fractional_bandwidth: float = 0.77

    def __post_init__(self):
        if not self.center_frequency > 0:
            raise ValueError("center_frequency must be positive")
        if not 0 < self.fractional_bandwidth <= 1:
            raise ValueError("fractional_bandwidth must lie in (0, 1]")

    def __call__(self, t):
        return gausspulse(t, fc=self.center_frequency, bw=self.fractional_bandwidth, bwr=-6)

    @property
    def half_duration(self) -> float:
        """Time after which the envelope falls below -120 dB."""
        return float(gausspulse("cutoff", fc=self.center_frequency,
                                bw=self.fractional_bandwidth, bwr=-6, tpr=-120))


def default_phantom() -> list[PointAbsorber]:
    """Nine unit absorbers on the axis at 25, 30, ..., 65 mm."""
    return [PointAbsorber(0.0, depth_mm * 1e-3) for depth_mm in range(25, 66, 5)]


def required_duration(absorbers, array: SensorArray, sound_speed: float) -> float:
    """Latest arrival time over all absorber/element pairs."""
    xe = array.element_positions
    latest = 0.0
    for src in absorbers:
        d = np.hypot(xe - src.lateral, src.axial)
        latest = max(latest, float(d.max()) / sound_speed)
    return latest


def simulate(absorbers, array: SensorArray, pulse: PulseModel, sound_speed: float,
             sampling_rate: float, duration: float) -> ChannelDataset:
    """Superpose every absorber's spherical-spreading response on every element.

    Raises
    ------
    DurationTooShort
        If the farthest arrival is not inside the recording.
    """
    needed = required_duration(absorbers, array, sound_speed)
    if needed >= duration:
        raise DurationTooShort(needed, duration)
    n = int(round(duration * sampling_rate))
    t = np.arange(n) / sampling_rate
    xe = array.element_positions
    out = np.zeros((array.element_count, n))
    for src in absorbers:
        d = np.hypot(xe - src.lateral, src.axial)
        gain = src.amplitude / np.maximum(d, NEAR_FIELD_CLAMP)
        out += gain[:, None] * pulse(t[None, :] - (d / sound_speed)[:, None])
    return ChannelDataset(out, sampling_rate)
