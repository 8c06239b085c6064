"""On-disk formats: binary channel data, envelope rasters and PGM previews.

Channel file (``.pabf``), little-endian throughout::

    offset  size  field
    0       5     magic b"PABF1"
    5       4     M, uint32 (channels)
    9       4     T, uint32 (samples per channel)
    13      8     sampling rate in Hz, float64
    21      8     element pitch in m, float64
    29      4*M*T samples, float32, channel-major (all of channel 0 first)

Envelope raster (``.f32``): one ASCII header line of ``key=value`` pairs
starting with ``PAENV1`` and ending in a newline, then
``axial_count * lateral_count`` float32 values, little-endian, row-major
with one row per depth.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import FormatError
from .geometry import ImageGrid, SensorArray
from .signal import ChannelDataset, ImagePlane

MAGIC = b"PABF1"
_HEADER = struct.Struct("<5sIIdd")
RASTER_MAGIC = "PAENV1"


def write_channel_file(path, data: ChannelDataset, array: SensorArray) -> None:
    M, T = data.samples.shape
    if M != array.element_count:
        raise ValueError("dataset channel count does not match the array")
    header = _HEADER.pack(MAGIC, M, T, float(data.sampling_rate), float(array.pitch))
    payload = np.ascontiguousarray(data.samples, dtype="<f4").tobytes()
    Path(path).write_bytes(header + payload)


def read_channel_file(path) -> tuple[ChannelDataset, SensorArray]:
    """Read a channel file; raises FormatError on bad magic or payload length."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: file shorter than the {_HEADER.size}-byte header")
    magic, M, T, fs, pitch = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    expected = M * T * 4
    got = len(raw) - _HEADER.size
    if got != expected:
        raise FormatError(f"{path}: payload is {got} bytes, header implies {expected} (M={M}, T={T})")
    if M < 4 or T < 16 or not fs > 0 or not pitch > 0:
        raise FormatError(f"{path}: implausible header M={M} T={T} fs={fs} pitch={pitch}")
    samples = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size).reshape(M, T).astype(float)
    if not np.all(np.isfinite(samples)):
        raise FormatError(f"{path}: payload contains non-finite samples")
    return ChannelDataset(samples, fs), SensorArray(M, pitch)


def _grid_fields(grid: ImageGrid) -> list[str]:
    return [f"{k}={v!r}" for k, v in grid.to_dict().items()]


def write_envelope(path, image: ImagePlane) -> None:
    if image.stage != "envelope":
        raise ValueError("only envelope images are written as rasters")
    fields = [RASTER_MAGIC, f"method={image.method or 'unknown'}", *_grid_fields(image.grid),
              f"flagged={image.flagged}", f"fallbacks={image.fallbacks}", "order=axial-major"]
    data = np.ascontiguousarray(image.values.T, dtype="<f4").tobytes()
    Path(path).write_bytes((" ".join(fields) + "\n").encode("ascii") + data)


def read_envelope(path) -> ImagePlane:
    raw = Path(path).read_bytes()
    nl = raw.find(b"\n")
    if nl < 0 or not raw.startswith(RASTER_MAGIC.encode()):
        raise FormatError(f"{path}: missing {RASTER_MAGIC} header line")
    try:
        parts = dict(p.split("=", 1) for p in raw[:nl].decode("ascii").split()[1:])
        grid = ImageGrid(
            float(parts["lateral_min"]), float(parts["lateral_max"]),
            float(parts["axial_min"]), float(parts["axial_max"]),
            int(parts["lateral_count"]), int(parts["axial_count"]),
        )
        flagged = int(parts.get("flagged", 0))
        fallbacks = int(parts.get("fallbacks", 0))
    except (KeyError, ValueError, UnicodeDecodeError) as exc:
        raise FormatError(f"{path}: malformed header ({exc})") from None
    payload = raw[nl + 1:]
    nx, nz = grid.shape
    if len(payload) != nx * nz * 4:
        raise FormatError(f"{path}: payload is {len(payload)} bytes, header implies {nx * nz * 4}")
    values = np.frombuffer(payload, dtype="<f4").reshape(nz, nx).T.astype(float)
    return ImagePlane(values, grid, "envelope", method=parts.get("method", ""),
                      flagged=flagged, fallbacks=fallbacks)


def write_pgm(path, image: ImagePlane, dynamic_range_db: float = 40.0) -> None:
    """8-bit binary PGM of a log-compressed image, rows = depth.

    0 dB maps to 255 and ``-dynamic_range_db`` (or below) to 0.
    """
    if image.stage != "log_compressed":
        raise ValueError("PGM export expects a log-compressed image")
    db = np.clip(image.values.T, -dynamic_range_db, 0.0)
    gray = np.round((db + dynamic_range_db) / dynamic_range_db * 255.0).astype(np.uint8)
    h, w = gray.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n255\n".encode("ascii") + gray.tobytes())


def read_pgm(path) -> np.ndarray:
    """Pixel array (rows, cols) of a binary PGM written by :func:`write_pgm`."""
    raw = Path(path).read_bytes()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while raw[pos:pos + 1].isspace():
            pos += 1
        start = pos
        while not raw[pos:pos + 1].isspace():
            pos += 1
        tokens.append(raw[start:pos])
    if tokens[0] != b"P5":
        raise FormatError(f"{path}: not a binary PGM")
    w, h = int(tokens[1]), int(tokens[2])
    return np.frombuffer(raw[pos + 1:pos + 1 + w * h], dtype=np.uint8).reshape(h, w)
