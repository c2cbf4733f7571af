"""Analysis configuration: the schema shared by the CLI and the HTTP
service.

A configuration names either a bundled preset or the full block set
(coefficient arrays in descending powers of s, a gain, or an FRF CSV for the
plant), plus the frequency range (Hz, log-spaced), the harmonic cap and
simulator options.  Frequencies are Hz at every user surface and rad/s
internally; the conversion lives here.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .closed_loop import ClosedLoopConfig
from .lti import FrfTable, LtiBlock, RationalTf, gain
from .presets import PRESETS
from .reset_controller import ResetController

__all__ = ["ConfigError", "BlockSpec", "ResetSpec", "AnalysisRange",
           "SimOptions", "AnalysisConfig", "load_config", "config_from_dict"]

TWO_PI = 2.0 * math.pi


class ConfigError(ValueError):
    """Configuration file/payload violates the schema."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class BlockSpec(_Strict):
    """One LTI block: num/den coefficient arrays, a plain gain, or (plant
    only) a path to an FRF CSV with header freq_hz,re,im."""

    num: list[float] | None = None
    den: list[float] | None = None
    gain: float | None = None
    frf_csv: str | None = None

    @model_validator(mode="after")
    def _one_variant(self):
        has_tf = self.num is not None or self.den is not None
        variants = sum([has_tf, self.gain is not None, self.frf_csv is not None])
        if variants != 1:
            raise ValueError("specify exactly one of num/den, gain, or frf_csv")
        if has_tf and (not self.num or not self.den):
            raise ValueError("num and den must both be non-empty")
        return self

    def build(self, field: str, allow_frf: bool = False) -> LtiBlock:
        if self.gain is not None:
            return gain(self.gain)
        if self.frf_csv is not None:
            if not allow_frf:
                raise ConfigError(f"{field}: FRF tables are supported for the plant only")
            try:
                return FrfTable.from_csv(self.frf_csv)
            except Exception as exc:
                raise ConfigError(f"{field}: {exc}") from exc
        try:
            return RationalTf(self.num, self.den)
        except ValueError as exc:
            raise ConfigError(f"{field}: {exc}") from exc


class ResetSpec(_Strict):
    """Reset controller given by its base-linear transfer function and the
    reset value."""

    num: list[float] = Field(min_length=1)
    den: list[float] = Field(min_length=1)
    gamma: float

    @model_validator(mode="after")
    def _gamma_range(self):
        if not (-1.0 < self.gamma <= 1.0):
            raise ValueError(f"gamma must lie in (-1, 1], got {self.gamma}")
        return self

    def build(self) -> ResetController:
        try:
            return ResetController.from_tf(RationalTf(self.num, self.den), self.gamma)
        except ValueError as exc:
            raise ConfigError(f"reset: {exc}") from exc


class AnalysisRange(_Strict):
    f_start_hz: float = 1.0
    f_end_hz: float = 1000.0
    points: int = 200
    harmonics: int = 100

    @model_validator(mode="after")
    def _ranges(self):
        if self.f_start_hz <= 0.0 or self.f_end_hz < self.f_start_hz:
            raise ValueError("frequency range must be positive and ascending")
        if self.points < 1 or self.harmonics < 1:
            raise ValueError("points and harmonics must be at least 1")
        return self


class SimOptions(_Strict):
    steps_per_cycle: int = 4096
    settle_cycles: int = 50
    analysis_cycles: int = 4
    refractory: float | None = None
    stepper: str = "propagator"
    hurwitz_tol: float = 0.0


class AnalysisConfig(_Strict):
    """Top-level configuration: a preset name or explicit blocks."""

    preset: str | None = None
    blocks: dict[str, BlockSpec] | None = None
    reset: ResetSpec | None = None
    plant: BlockSpec | None = None
    analysis: AnalysisRange = AnalysisRange()
    sim: SimOptions = SimOptions()

    @model_validator(mode="after")
    def _preset_or_blocks(self):
        if self.preset is not None:
            if self.preset not in PRESETS:
                raise ValueError(
                    f"unknown preset {self.preset!r}; choose from {sorted(PRESETS)}"
                )
            if self.blocks or self.reset or self.plant:
                raise ValueError("give either a preset or explicit blocks, not both")
            return self
        if not (self.blocks and self.reset and self.plant):
            raise ValueError("explicit configs need blocks, reset, and plant sections")
        allowed = {"c1", "c2", "c3", "c4", "cs"}
        unknown = set(self.blocks) - allowed
        if unknown:
            raise ValueError(f"unknown block names {sorted(unknown)}; allowed: {sorted(allowed)}")
        missing = allowed - set(self.blocks)
        if missing:
            raise ValueError(
                f"missing block definitions {sorted(missing)} "
                "(use gain 1.0 / gain 0.0 for absent paths explicitly)"
            )
        return self

    def system(self) -> ClosedLoopConfig:
        if self.preset is not None:
            return PRESETS[self.preset]()
        blocks = {name: spec.build(name) for name, spec in self.blocks.items()}
        return ClosedLoopConfig(
            c1=blocks["c1"], c2=blocks["c2"], c3=blocks["c3"],
            c4=blocks["c4"], cs=blocks["cs"],
            cr=self.reset.build(),
            plant=self.plant.build("plant", allow_frf=True),
        )

    def frequencies_rad(self) -> np.ndarray:
        a = self.analysis
        if a.points == 1:
            return np.array([TWO_PI * a.f_start_hz])
        return TWO_PI * np.geomspace(a.f_start_hz, a.f_end_hz, a.points)


def config_from_dict(data: dict) -> AnalysisConfig:
    try:
        return AnalysisConfig.model_validate(data)
    except ValidationError as exc:
        lines = []
        for err in exc.errors():
            loc = ".".join(str(p) for p in err["loc"]) or "<root>"
            lines.append(f"{loc}: {err['msg']}")
        raise ConfigError("; ".join(lines)) from exc


def load_config(path: str | Path) -> AnalysisConfig:
    """Parse a YAML (or JSON, a YAML subset) configuration file."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return config_from_dict(raw)
