"""Scenario configuration: one JSON document, degrees on the outside."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .fieldmodel import ELEMENT_KINDS, POLARIZATIONS
from .ga import CODINGS, GAConfig


@dataclass(frozen=True)
class GASettings:
    population: int = 200
    elites: int = 40
    mutation: float = 0.01
    max_iter: int = 500
    stagnation: int = 100
    amp_bits: int = 7
    phase_bits: int = 8
    coding: str = "gray"
    seed_with_projection: bool = True

    def to_config(self, seed: int) -> GAConfig:
        return GAConfig(self.population, self.elites, self.mutation, self.max_iter, self.stagnation,
                        seed=seed, seed_with_projection=self.seed_with_projection)


@dataclass(frozen=True)
class ScenarioConfig:
    num_elements: int = 4
    spacing_wavelengths: float = 0.1
    array_axis: tuple = (1.0, 0.0, 0.0)
    element_kind: str = "half-wave-dipole"
    element_axis: tuple = (0.0, 0.0, 1.0)
    frequency_hz: float = 1.6e9
    grid_l: int = 180
    grid_q: int = 360
    direction_deg: tuple = (90.0, 0.0)
    polarization: str = "theta"
    ranges: tuple = (2.27, 3.54, 4.81)
    distortion_level: float = 0.0
    distortion_seed: int = 0
    fields: str | None = None  # load element fields from this directory instead of synthesizing
    regularization: float = 0.0
    cut_step_deg: float = 0.5
    ga: GASettings = field(default_factory=GASettings)
    out: str = "out"
    seed: int = 0

    def __post_init__(self):
        for name in ("array_axis", "element_axis", "direction_deg", "ranges"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        if isinstance(self.ga, dict):
            object.__setattr__(self, "ga", _build(GASettings, self.ga, "ga"))
        self.validate()

    def validate(self) -> None:
        if self.num_elements < 1:
            raise ConfigError("num_elements must be >= 1")
        if not self.spacing_wavelengths > 0:
            raise ConfigError("spacing must be positive")
        if not self.frequency_hz > 0:
            raise ConfigError("frequency_hz must be positive")
        if self.element_kind not in ELEMENT_KINDS:
            raise ConfigError(f"element_kind must be one of {ELEMENT_KINDS}")
        if len(self.element_axis) != 3 or abs(math.hypot(*self.element_axis) - 1.0) > 1e-12:
            raise ConfigError("element_axis must be a unit 3-vector")
        if len(self.array_axis) != 3 or not math.hypot(*self.array_axis) > 0:
            raise ConfigError("array_axis must be a nonzero 3-vector")
        if self.grid_l < 2 or self.grid_q < 4:
            raise ConfigError("grid needs l >= 2 and q >= 4")
        if len(self.direction_deg) != 2:
            raise ConfigError("direction_deg must be [theta, phi]")
        t, p = self.direction_deg
        if not (0.0 <= t <= 180.0 and 0.0 <= p < 360.0):
            raise ConfigError("direction out of range: need 0 <= theta <= 180 and 0 <= phi < 360")
        if self.polarization not in POLARIZATIONS:
            raise ConfigError(f"polarization must be one of {POLARIZATIONS}")
        if not self.ranges or any(not P > 1 for P in self.ranges):
            raise ConfigError("every range P must exceed 1")
        if self.distortion_level < 0 or self.regularization < 0:
            raise ConfigError("distortion_level and regularization must be >= 0")
        if self.seed < 0 or self.distortion_seed < 0:
            raise ConfigError("seeds must be non-negative")
        g = self.ga
        if g.coding not in CODINGS:
            raise ConfigError(f"ga.coding must be one of {CODINGS}")
        if g.amp_bits < 1 or g.phase_bits < 1:
            raise ConfigError("ga bit counts must be >= 1")
        try:
            g.to_config(self.seed)
        except ValueError as exc:
            raise ConfigError(f"ga: {exc}") from None

    @property
    def direction_rad(self) -> tuple:
        return tuple(math.radians(a) for a in self.direction_deg)

    def to_dict(self) -> dict:
        return _plain(dataclasses.asdict(self))

    def to_json(self) -> str:
        """Canonical form: sorted keys, two-space indent, trailing newline."""
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return _build(cls, data, "config")

    @classmethod
    def from_json(cls, text: str) -> "ScenarioConfig":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from None

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


def _plain(v):
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.generic):
        return v.item()
    return v


def _build(cls, data: dict, where: str):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")
    try:
        return cls(**data)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def load_config(path) -> ScenarioConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return ScenarioConfig.from_json(text)
