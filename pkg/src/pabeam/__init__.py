"""Photoacoustic DAS, MV and double-MV beamforming on linear-array channel data."""

from .beamformers import METHODS, BeamformerConfig, reconstruct, reconstruct_methods
from .geometry import ImageGrid, SensorArray, compute_delays
from .metrics import depth_sweep_report, fwhm, lateral_profile, snr_metric
from .phantom import PointAbsorber, PulseModel, default_phantom, simulate
from .signal import (
    ChannelDataset, ImagePlane, add_noise_at_snr, analytic_signal, envelope, log_compress,
)

__version__ = "0.1.0"

__all__ = [
    "METHODS", "BeamformerConfig", "reconstruct", "reconstruct_methods",
    "ImageGrid", "SensorArray", "compute_delays",
    "depth_sweep_report", "fwhm", "lateral_profile", "snr_metric",
    "PointAbsorber", "PulseModel", "default_phantom", "simulate",
    "ChannelDataset", "ImagePlane", "add_noise_at_snr", "analytic_signal", "envelope",
    "log_compress",
]
