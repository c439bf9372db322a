"""Run configuration: a single YAML/JSON document, validated strictly."""
from __future__ import annotations

from pathlib import Path
from typing import List, Literal, Optional, Tuple

import yaml
from pydantic import (BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt,
                      ValidationError, field_validator, model_validator)

from .blob import Scenario
from .geometry import HelixGeometry


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GeometryConfig(_Strict):
    h: PositiveFloat
    r0: float = Field(0.0, ge=0.0)
    tau_squared: bool = True

    def build(self) -> HelixGeometry:
        return HelixGeometry(self.h, self.r0, self.tau_squared)


class OdeConfig(_Strict):
    t_final: float = Field(ge=0.0)
    n_steps: PositiveInt
    stride: PositiveInt = 1
    collision_floor: PositiveFloat = 1e-8

    @property
    def dt(self) -> float:
        return self.t_final / self.n_steps


class BlobConfig(_Strict):
    epsilon: float = Field(gt=0.0, lt=1.0)
    n_side: int = Field(16, ge=8)
    delta_factor: PositiveFloat = 1.5
    dt: Optional[PositiveFloat] = None
    cfl: PositiveFloat = 0.2
    t_final: float = Field(0.0, ge=0.0)
    periods: Optional[PositiveFloat] = None
    cadence: PositiveInt = 1
    mass_radii: Tuple[PositiveFloat, PositiveFloat] = (1.5, 3.0)
    dump_mode: Literal["single", "per_time"] = "single"

    @model_validator(mode="after")
    def _one_horizon(self):
        if self.periods is not None and self.t_final != 0.0:
            raise ValueError("give either t_final or periods, not both")
        return self


class LeapfrogConfig(_Strict):
    level_fractions: List[PositiveFloat] = []
    levels: List[PositiveFloat] = []
    periods: PositiveInt = 3
    steps_per_period: int = Field(4096, ge=16)
    rho: Optional[PositiveFloat] = None
    rho_fraction: float = Field(0.9, gt=0.0, le=1.0)
    polyline_points: int = Field(201, ge=3)


class SweepConfig(_Strict):
    epsilons: List[float]

    @field_validator("epsilons")
    @classmethod
    def _descending(cls, v):
        if len(v) < 2:
            raise ValueError("a sweep needs at least two epsilon values")
        if any(not 0 < e < 1 for e in v):
            raise ValueError("every epsilon must lie in (0, 1)")
        if any(b > a for a, b in zip(v, v[1:])):
            raise ValueError("epsilon list must be non-increasing")
        return v


class RunConfig(_Strict):
    geometry: GeometryConfig
    strengths: List[float] = Field(min_length=1)
    centers: List[Tuple[float, float]]
    centers_frame: Literal["physical", "tilde"] = "physical"
    ode: Optional[OdeConfig] = None
    blob: Optional[BlobConfig] = None
    leapfrog: Optional[LeapfrogConfig] = None
    sweep: Optional[SweepConfig] = None
    output: Optional[str] = None

    @field_validator("strengths")
    @classmethod
    def _nonzero(cls, v):
        if any(a == 0 for a in v):
            raise ValueError("strengths must be nonzero")
        return v

    @model_validator(mode="after")
    def _shapes(self):
        if len(self.centers) != len(self.strengths):
            raise ValueError("centers and strengths must have the same length")
        seen = set()
        for c in self.centers:
            if tuple(c) in seen:
                raise ValueError(f"duplicate initial centre {c}")
            seen.add(tuple(c))
        return self

    def physical_centers(self):
        """Initial centres ``P_i^0`` in rescaled physical coordinates."""
        import numpy as np

        c = np.asarray(self.centers, dtype=float)
        if self.centers_frame == "tilde":
            return c @ self.geometry.build().dt0_inv.T
        return c

    def scenario(self, epsilon: Optional[float] = None, t_final: Optional[float] = None) -> Scenario:
        b = self.blob
        if b is None:
            raise ConfigError("the 'blob' section is required")
        return Scenario(
            geom=self.geometry.build(),
            strengths=self.strengths,
            centers=self.physical_centers(),
            epsilon=b.epsilon if epsilon is None else epsilon,
            n_side=b.n_side,
            delta_factor=b.delta_factor,
            dt=b.dt,
            cfl=b.cfl,
            t_final=b.t_final if t_final is None else t_final,
            cadence=b.cadence,
            mass_radii=b.mass_radii,
        )


class ConfigError(ValueError):
    pass


def load_config(path) -> RunConfig:
    """Parse and validate; raises :class:`ConfigError` with a readable message."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML/JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping")
    try:
        return RunConfig.model_validate(doc)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc
