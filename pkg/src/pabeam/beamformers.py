"""Delay-and-sum, minimum-variance and double minimum-variance beamforming.

All operations accept a leading batch of pixels: a snapshot is ``(..., M)``,
a snapshot buffer (2K+1 consecutive delayed snapshots) is ``(..., N, M)``,
a covariance is ``(..., L, L)`` and a weight vector ``(..., L)``. The
steering vector is all ones because the channels are already delay-aligned.

MV weights every length-L subarray with a single adaptive vector W and
averages the weighted subarrays. That average can be written as the sum of
per-subarray outputs

    p_i = W^H X_i / (M - L + 1),   i = 1 .. M - L + 1,

and the sum over i is itself a delay-and-sum over a virtual array of
M_D = M - L + 1 elements. Double MV replaces that sum with a second MV stage
over the p_i (subarray length L_D, loading Δ_D, temporal half window K_D).
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, replace

import numpy as np
import scipy.linalg as sla
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ConfigError, FactorizationFailed, SubarrayTooLong, ZeroTrace
from .geometry import ImageGrid, SensorArray, compute_delays, interpolate_channels
from .signal import ImagePlane

log = logging.getLogger(__name__)

METHODS = ("das", "mv", "dmv")

# scratch budget for the stacked subarray windows of one pixel block
_BLOCK_BYTES = 64 * 2 ** 20


@dataclass(frozen=True)
class BeamformerConfig:
    """Tunables of the adaptive beamformers.

    ``None`` lengths and loading factors resolve to the defaults for an
    M-element array: L = M/2, L_D = (M - L)/2, Δ = 1/(100 L),
    Δ_D = 1/(100 L_D), using floor division and a minimum of 1.
    """

    subarray_length: int | None = None
    second_subarray_length: int | None = None
    temporal_half_window: int = 3
    second_temporal_half_window: int = 0
    loading_factor: float | None = None
    second_loading_factor: float | None = None
    sound_speed: float = 1540.0

    def resolved(self, element_count: int) -> "BeamformerConfig":
        L = self.subarray_length
        if L is None:
            L = max(1, element_count // 2)
        L_D = self.second_subarray_length
        if L_D is None:
            L_D = max(1, (element_count - L) // 2)
        delta = self.loading_factor if self.loading_factor is not None else 1.0 / (100 * max(L, 1))
        delta_d = (self.second_loading_factor if self.second_loading_factor is not None
                   else 1.0 / (100 * max(L_D, 1)))
        return replace(self, subarray_length=L, second_subarray_length=L_D,
                       loading_factor=delta, second_loading_factor=delta_d)

    def validate(self, element_count: int) -> "BeamformerConfig":
        """Resolve defaults and check every constraint; returns the resolved config."""
        cfg = self.resolved(element_count)
        M = element_count
        L, L_D = cfg.subarray_length, cfg.second_subarray_length
        if not 1 <= L <= M:
            raise ConfigError(f"subarray_length L={L} must satisfy 1 <= L <= M={M}")
        M_D = M - L + 1
        if not 1 <= L_D <= M_D:
            raise ConfigError(
                f"second_subarray_length L_D={L_D} must satisfy 1 <= L_D <= M-L+1={M_D}"
            )
        if cfg.temporal_half_window < 0 or cfg.second_temporal_half_window < 0:
            raise ConfigError("temporal half windows K, K_D must be >= 0")
        if not 0 < cfg.loading_factor < 1.0 / L:
            raise ConfigError(f"loading_factor {cfg.loading_factor} must lie in (0, 1/L={1.0 / L})")
        if not 0 < cfg.second_loading_factor < 1.0 / L_D:
            raise ConfigError(
                f"second_loading_factor {cfg.second_loading_factor} must lie in (0, 1/L_D={1.0 / L_D})"
            )
        if not cfg.sound_speed > 0:
            raise ConfigError("sound_speed must be positive")
        return cfg

    def to_dict(self) -> dict:
        return asdict(self)


def das(snapshot: np.ndarray) -> np.ndarray:
    """Uniformly weighted mean over the elements."""
    return np.mean(snapshot, axis=-1)


def subarrays(snapshot: np.ndarray, length: int) -> np.ndarray:
    """Overlapping length-``length`` windows of the last axis, shape (..., M-L+1, L)."""
    M = snapshot.shape[-1]
    if length > M:
        raise SubarrayTooLong(f"subarray length {length} exceeds array length {M}")
    if length < 1:
        raise ValueError("subarray length must be >= 1")
    return sliding_window_view(snapshot, length, axis=-1)


def estimate_covariance(buffer: np.ndarray, subarray_length: int) -> np.ndarray:
    """Spatially smoothed, temporally averaged sample covariance.

    Averages ``X_l X_l^H`` over every length-L subarray ``X_l`` of every
    snapshot in ``buffer`` (shape ``(..., N, M)``, N = 2K + 1).
    """
    win = subarrays(buffer, subarray_length)
    lead = win.shape[:-3]
    # contiguous copy: matmul on the overlapping window view bypasses BLAS
    win = np.ascontiguousarray(win.reshape(*lead, -1, subarray_length))
    R = np.matmul(win.swapaxes(-1, -2), win.conj()) / win.shape[-2]
    return 0.5 * (R + R.swapaxes(-1, -2).conj())


def apply_diagonal_loading(R: np.ndarray, loading: float) -> np.ndarray:
    """Return ``R + loading * trace(R) * I``.

    Raises ZeroTrace when any matrix in the batch has zero trace.
    """
    if not loading > 0:
        raise ValueError("loading factor must be positive")
    tr = np.trace(R, axis1=-2, axis2=-1).real
    if np.any(tr == 0):
        raise ZeroTrace("covariance has zero trace")
    return _load(R, loading)


def _load(R, loading):
    tr = np.trace(R, axis1=-2, axis2=-1).real
    eye = np.eye(R.shape[-1])
    return R + (loading * tr)[..., None, None] * eye


def _solve_weights(R: np.ndarray):
    """Distortionless MV weights for a batch of loaded covariances.

    Returns ``(weights, failed)``; failed entries carry uniform weights.
    """
    L = R.shape[-1]
    flat = R.reshape(-1, L, L)
    w = np.empty((flat.shape[0], L), dtype=complex)
    failed = np.zeros(flat.shape[0], dtype=bool)
    a = np.ones(L)
    for i, Ri in enumerate(flat):
        try:
            cho = sla.cho_factor(Ri, lower=True, check_finite=False)
            u = sla.cho_solve(cho, a, check_finite=False)
            wi = u / u.sum()
            if not np.all(np.isfinite(wi)):
                raise np.linalg.LinAlgError("non-finite weights")
            w[i] = wi
        except (np.linalg.LinAlgError, ValueError):
            w[i] = a / L
            failed[i] = True
    return w.reshape(R.shape[:-1]), failed.reshape(R.shape[:-2])


def mv_weights(R_loaded: np.ndarray) -> np.ndarray:
    """Solve ``R u = a`` by Cholesky and return ``w = u / (a^H u)``.

    Raises
    ------
    FactorizationFailed
        If any covariance in the batch is not numerically positive definite.
    """
    w, failed = _solve_weights(R_loaded)
    if np.any(failed):
        raise FactorizationFailed(f"{int(failed.sum())} covariance(s) not positive definite")
    return w


def subarray_outputs(w: np.ndarray, snapshot: np.ndarray) -> np.ndarray:
    """Per-subarray weighted outputs ``p_i = w^H X_i / (M - L + 1)``."""
    win = subarrays(snapshot, w.shape[-1])
    return np.einsum("...li,...i->...l", win, w.conj()) / win.shape[-2]


def mv_output(p: np.ndarray) -> np.ndarray:
    return np.sum(p, axis=-1)


def _dmv(p_buffer, L_D, loading_D):
    """Second MV stage; returns (output, failed) with mean(p) where it failed."""
    centre = p_buffer.shape[-2] // 2
    R_D = _load(estimate_covariance(p_buffer, L_D), loading_D)
    w_D, failed = _solve_weights(R_D)
    p = p_buffer[..., centre, :]
    out = mv_output(subarray_outputs(w_D, p))  # mean of W_D^H P_l over l
    if np.any(failed):
        out = np.where(failed, np.mean(p, axis=-1), out)
    return out, failed


def dmv_output(p_buffer: np.ndarray, second_subarray_length: int,
               second_loading_factor: float) -> np.ndarray:
    """Double-MV output from the subarray outputs at 2K_D + 1 consecutive times.

    ``p_buffer`` has shape ``(..., 2K_D+1, M_D)``; the centre row is the focal
    time. The p_i are treated as an M_D-element array, a second smoothed and
    loaded covariance gives weights ``W_D`` and the output is the average of
    ``W_D^H P_l`` over the ``M_D - L_D + 1`` second-stage subarrays.

    If the second-stage covariance cannot be factorised, the output falls back
    to ``mean(p)`` (uniform second-stage weighting) and a warning is logged.
    """
    M_D = p_buffer.shape[-1]
    if not 1 <= second_subarray_length <= M_D:
        raise SubarrayTooLong(f"second-stage subarray length {second_subarray_length} "
                              f"outside [1, {M_D}]")
    out, failed = _dmv(p_buffer, second_subarray_length, second_loading_factor)
    if np.any(failed):
        log.warning("second-stage factorisation failed for %d pixel(s); used uniform weights",
                    int(np.sum(failed)))
    return out


def beamform_pixels(samples, delays, cfg: BeamformerConfig, methods, K=None, K_D=None):
    """Beamform a block of pixels that share the same temporal windows.

    Parameters
    ----------
    samples : ndarray, shape (M, T)
        Analytic channel data.
    delays : ndarray, shape (P, M)
        Focal delays in samples; every ``delay +- max(K, K_D)`` must be in range.
    cfg : BeamformerConfig
        Resolved configuration. Loading factors are used as given, without the
        ``Δ < 1/L`` check, so this entry point also serves limit studies.
    methods : iterable of {"das", "mv", "dmv"}
    K, K_D : int, optional
        Override the configured half windows (used for edge shrinking).

    Returns
    -------
    values : dict mapping method to complex ndarray of shape (P,)
    fallbacks : dict mapping method to the number of pixels with uniform weights
    """
    K = cfg.temporal_half_window if K is None else K
    K_D = cfg.second_temporal_half_window if K_D is None else K_D
    methods = set(methods)
    adaptive = methods & {"mv", "dmv"}
    span = max(K, K_D) if adaptive else 0
    offsets = np.arange(-span, span + 1)
    S = interpolate_channels(samples, delays[:, None, :] + offsets[None, :, None])

    values, fallbacks = {}, {}
    if "das" in methods:
        values["das"] = das(S[:, span])
        fallbacks["das"] = 0
    if not adaptive:
        return values, fallbacks

    L, L_D = cfg.subarray_length, cfg.second_subarray_length
    R = _load(estimate_covariance(S[:, span - K:span + K + 1], L), cfg.loading_factor)
    w, failed = _solve_weights(R)
    if "mv" in methods:
        values["mv"] = mv_output(subarray_outputs(w, S[:, span]))
        fallbacks["mv"] = int(failed.sum())
    if "dmv" in methods:
        p_buf = subarray_outputs(w[:, None, :], S[:, span - K_D:span + K_D + 1])
        values["dmv"], failed_d = _dmv(p_buf, L_D, cfg.second_loading_factor)
        fallbacks["dmv"] = int((failed | failed_d).sum())
    return values, fallbacks


def _block_size(cfg, K, M):
    L = cfg.subarray_length
    per_pixel = (2 * K + 1) * (M - L + 1) * L * 16 * 3
    return max(1, _BLOCK_BYTES // max(per_pixel, 1))


def reconstruct_methods(data, grid: ImageGrid, array: SensorArray, config: BeamformerConfig,
                        methods=METHODS) -> dict[str, ImagePlane]:
    """Beamform every pixel of ``grid`` with each requested method.

    MV and DMV share their first stage. Pixels whose focal delay lies outside
    the recording are set to zero and counted in ``ImagePlane.flagged``. Near
    the recording edges the temporal windows shrink symmetrically to the
    samples that exist.
    """
    methods = tuple(methods)
    for m in methods:
        if m not in METHODS:
            raise ConfigError(f"unknown method {m!r}; expected one of {METHODS}")
    M, T = data.samples.shape
    if M != array.element_count:
        raise ConfigError(f"dataset has {M} channels but the array has {array.element_count}")
    cfg = config.validate(M)
    table = compute_delays(grid, array, cfg.sound_speed, data.sampling_rate)
    d = table.delays.reshape(-1, M)
    P = d.shape[0]
    room = np.floor(np.minimum(d.min(axis=1), (T - 2) - d.max(axis=1))).astype(int)
    valid = room >= 0
    K_eff = np.minimum(cfg.temporal_half_window, room)
    KD_eff = np.minimum(cfg.second_temporal_half_window, room)

    out = {m: np.zeros(P, dtype=complex) for m in methods}
    fb = {m: 0 for m in methods}
    keys = np.stack([K_eff, KD_eff], axis=1)
    for k, kd in np.unique(keys[valid], axis=0):
        idx = np.flatnonzero(valid & (K_eff == k) & (KD_eff == kd))
        step = _block_size(cfg, max(k, kd), M)
        for start in range(0, idx.size, step):
            sel = idx[start:start + step]
            vals, fbs = beamform_pixels(data.samples, d[sel], cfg, methods, K=int(k), K_D=int(kd))
            for m in methods:
                out[m][sel] = vals[m]
                fb[m] += fbs[m]

    flagged = int(P - valid.sum())
    if flagged:
        log.warning("%d pixel(s) outside the recording were zero-filled", flagged)
    images = {}
    for m in methods:
        if fb[m]:
            log.info("%s: %d pixel(s) fell back to uniform weights", m, fb[m])
        images[m] = ImagePlane(out[m].reshape(grid.shape), grid, "beamformed", method=m,
                               flagged=flagged, fallbacks=fb[m])
    return images


def reconstruct(data, grid: ImageGrid, array: SensorArray, config: BeamformerConfig,
                method: str) -> ImagePlane:
    """Beamformed (complex, pre-envelope) image for a single method."""
    return reconstruct_methods(data, grid, array, config, (method,))[method]


__all__ = [
    "METHODS", "BeamformerConfig", "das", "subarrays", "estimate_covariance",
    "apply_diagonal_loading", "mv_weights", "subarray_outputs", "mv_output", "dmv_output",
    "beamform_pixels", "reconstruct", "reconstruct_methods",
]
