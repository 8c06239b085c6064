"""Channel pre-processing and image post-processing.

Order of operations in the imaging chain: noise is added to the raw RF,
then each channel is converted to its analytic signal, the complex channels
are beamformed, and only the beamformed image is envelope-detected and
log-compressed.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.signal import hilbert

from .errors import AllZeroImage, NonFinite, ZeroSignal
from .geometry import ImageGrid

STAGES = ("beamformed", "envelope", "log_compressed")


@dataclass(frozen=True)
class ChannelDataset:
    """Real RF samples, shape (M, T), one row per element."""

    samples: np.ndarray = field(repr=False)
    sampling_rate: float

    def __post_init__(self):
        if self.samples.ndim != 2:
            raise ValueError("samples must be 2-D (M, T)")
        if self.samples.shape[1] < 16:
            raise ValueError(f"need at least 16 samples per channel, got {self.samples.shape[1]}")

    @property
    def element_count(self) -> int:
        return self.samples.shape[0]

    @property
    def sample_count(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True)
class AnalyticDataset:
    samples: np.ndarray = field(repr=False)
    sampling_rate: float


@dataclass
class ImagePlane:
    """Pixel values of shape (lateral_count, axial_count) on ``grid``.

    ``flagged`` counts pixels that could not be beamformed (set to zero);
    ``fallbacks`` counts pixels whose adaptive weights fell back to uniform.
    """

    values: np.ndarray = field(repr=False)
    grid: ImageGrid
    stage: str
    method: str = ""
    flagged: int = 0
    fallbacks: int = 0

    def __post_init__(self):
        if self.stage not in STAGES:
            raise ValueError(f"unknown stage {self.stage!r}")
        if self.values.shape != self.grid.shape:
            raise ValueError(f"values shape {self.values.shape} != grid shape {self.grid.shape}")


def analytic_signal(data: ChannelDataset) -> AnalyticDataset:
    """Per-channel analytic signal by the one-sided spectrum method (no zero padding)."""
    x = np.asarray(data.samples, dtype=float)
    if not np.all(np.isfinite(x)):
        raise NonFinite("channel data contains NaN or Inf")
    return AnalyticDataset(hilbert(x, axis=-1), data.sampling_rate)


def envelope(image: ImagePlane) -> ImagePlane:
    if image.stage != "beamformed":
        raise ValueError(f"envelope expects a beamformed image, got {image.stage!r}")
    return replace(image, values=np.abs(image.values), stage="envelope")


def log_compress(image: ImagePlane, floor_db: float = -60.0) -> ImagePlane:
    """Normalise to the brightest pixel and convert to dB, clamped at ``floor_db``."""
    if image.stage != "envelope":
        raise ValueError(f"log_compress expects an envelope image, got {image.stage!r}")
    peak = image.values.max()
    if not peak > 0:
        raise AllZeroImage("image has no positive pixel")
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(image.values / peak)
    return replace(image, values=np.maximum(db, floor_db), stage="log_compressed")


def add_noise_at_snr(data: ChannelDataset, target_snr_db: float, seed: int) -> ChannelDataset:
    """Add white Gaussian noise so that mean signal power / noise variance hits the target.

    Signal power is the mean square over every sample of every channel; one
    noise level is used for the whole dataset. ``target_snr_db = inf`` returns
    the data unchanged.
    """
    if np.isinf(target_snr_db) and target_snr_db > 0:
        return ChannelDataset(data.samples.copy(), data.sampling_rate)
    power = np.mean(np.square(data.samples, dtype=float))
    if power == 0:
        raise ZeroSignal("cannot scale noise to a zero-power signal")
    sigma = np.sqrt(power / 10.0 ** (target_snr_db / 10.0))
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, sigma, size=data.samples.shape)
    return ChannelDataset(data.samples + noise, data.sampling_rate)
