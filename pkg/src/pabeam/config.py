"""JSON run configuration shared by the CLI subcommands."""

from __future__ import annotations

import json
import math
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .beamformers import METHODS, BeamformerConfig
from .errors import ConfigError
from .geometry import ImageGrid, SensorArray
from .phantom import PointAbsorber, PulseModel, default_phantom


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ArraySection(_Section):
    element_count: int = Field(128, ge=4)
    pitch: float = Field(1e-4, gt=0)


class PulseSection(_Section):
    center_frequency: float = Field(5e6, gt=0)
    fractional_bandwidth: float = Field(0.77, gt=0, le=1)


class AbsorberSection(_Section):
    lateral: float = 0.0
    axial: float = Field(gt=0)
    amplitude: float = Field(1.0, gt=0)
    radius: float = Field(1e-4, ge=0)


class GridSection(_Section):
    lateral_min: float = -2e-3
    lateral_max: float = 2e-3
    axial_min: float = Field(22.5e-3, gt=0)
    axial_max: float = 67.5e-3
    lateral_count: int = Field(401, ge=1)
    axial_count: int = Field(451, ge=1)


class BeamformerSection(_Section):
    subarray_length: int | None = None
    second_subarray_length: int | None = None
    temporal_half_window: int = Field(3, ge=0)
    second_temporal_half_window: int = Field(0, ge=0)
    loading_factor: float | None = None
    second_loading_factor: float | None = None


def _default_absorbers():
    return [AbsorberSection(lateral=a.lateral, axial=a.axial, amplitude=a.amplitude,
                            radius=a.radius) for a in default_phantom()]


class RunConfig(_Section):
    """Everything needed to simulate, beamform and evaluate one run.

    ``snr_db = None`` means no noise is added.
    """

    array: ArraySection = ArraySection()
    sound_speed: float = Field(1540.0, gt=0)
    sampling_rate: float = Field(50e6, gt=0)
    duration: float = Field(100e-6, gt=0)
    pulse: PulseSection = PulseSection()
    absorbers: list[AbsorberSection] = Field(default_factory=_default_absorbers)
    grid: GridSection = GridSection()
    beamformer: BeamformerSection = BeamformerSection()
    snr_db: float | None = 50.0
    seed: int = Field(0, ge=0, lt=2 ** 64)
    methods: list[str] = list(METHODS)
    out_dir: str = "out"

    @field_validator("methods")
    @classmethod
    def _known_methods(cls, v):
        for m in v:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}; expected one of {METHODS}")
        return v

    @field_validator("snr_db")
    @classmethod
    def _finite_snr(cls, v):
        if v is not None and not math.isfinite(v):
            raise ValueError("use null for a noiseless run")
        return v

    def sensor_array(self) -> SensorArray:
        return SensorArray(self.array.element_count, self.array.pitch)

    def pulse_model(self) -> PulseModel:
        return PulseModel(self.pulse.center_frequency, self.pulse.fractional_bandwidth)

    def phantom(self) -> list[PointAbsorber]:
        return [PointAbsorber(a.lateral, a.axial, a.amplitude, a.radius) for a in self.absorbers]

    def image_grid(self) -> ImageGrid:
        try:
            return ImageGrid(**self.grid.model_dump())
        except ValueError as exc:
            raise ConfigError(f"grid: {exc}") from None

    def beamformer_config(self) -> BeamformerConfig:
        return BeamformerConfig(**self.beamformer.model_dump(), sound_speed=self.sound_speed)

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)

    def with_overrides(self, **kw) -> "RunConfig":
        return RunConfig.model_validate({**self.model_dump(), **kw})


def _describe(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"{loc}: {err['msg']}")
    return "; ".join(lines)


def parse_config(text: str) -> RunConfig:
    """Parse JSON text; raises ConfigError naming the offending line or field."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_describe(exc)) from None


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())
