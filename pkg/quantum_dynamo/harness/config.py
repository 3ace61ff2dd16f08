"""Experiment configuration schema, validation and sweep expansion."""

import copy
import hashlib
import itertools
import json
import math
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from quantum_dynamo.exceptions import ConfigValidationError
from quantum_dynamo.model.bath import discretize_bath
from quantum_dynamo.model.params import ModelParams, ModeSet, TimeGrid

SweepValue = Union[float, str]


class SolverKind(str, Enum):
    ED = "ed"
    SSE = "sse"
    NIBA = "niba"
    GKLS = "gkls"
    ANALYTIC = "analytic"


class BathKind(str, Enum):
    MODES = "modes"
    DISCRETIZED = "discretized"
    CONTINUUM = "continuum"


class SweepMode(str, Enum):
    PRODUCT = "product"
    ZIP = "zip"


class BathConfig(BaseModel):
    """Explicit modes, a discretized Ohmic band, or the continuum.

    With ``resonant`` set, a single explicit mode takes omega = v.
    """

    model_config = ConfigDict(extra="forbid")

    kind: BathKind = BathKind.CONTINUUM
    omegas: List[float] = Field(default_factory=list)
    gs: List[float] = Field(default_factory=list)
    resonant: bool = False
    n_modes: Optional[int] = Field(None, ge=1)
    omega_max: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def _check_kind(self) -> "BathConfig":
        if self.kind is BathKind.MODES:
            if not self.gs:
                raise ValueError("explicit modes need gs")
            if self.resonant and len(self.gs) != 1:
                raise ValueError("a resonant bath has exactly one mode")
            if not self.resonant and len(self.omegas) != len(self.gs):
                raise ValueError("omegas and gs must have equal length")
        if self.kind is BathKind.DISCRETIZED and (self.n_modes is None or self.omega_max is None):
            raise ValueError("a discretized bath needs n_modes and omega_max")
        return self

    def mode_set(self, p: ModelParams) -> Optional[ModeSet]:
        if self.kind is BathKind.CONTINUUM:
            return None
        if self.kind is BathKind.DISCRETIZED:
            return discretize_bath(p, self.n_modes, self.omega_max)
        omegas = [p.v] if self.resonant else self.omegas
        return ModeSet.from_arrays(omegas, self.gs)


class GridConfig(BaseModel):
    """Either an explicit end time or a number of half periods pi/v."""

    model_config = ConfigDict(extra="forbid")

    t0: float = 0.0
    tf: Optional[float] = Field(None, gt=0)
    n_half: Optional[float] = Field(None, gt=0)
    n_steps: Optional[int] = Field(None, ge=1)
    steps_per_half: int = Field(200, ge=1)

    @model_validator(mode="after")
    def _check_span(self) -> "GridConfig":
        if (self.tf is None) == (self.n_half is None):
            raise ValueError("give exactly one of tf and n_half")
        return self

    def time_grid(self, p: ModelParams) -> TimeGrid:
        if self.n_half is not None:
            tf = self.t0 + self.n_half * p.half_period
            n_steps = self.n_steps or max(1, int(round(self.n_half * self.steps_per_half)))
        else:
            tf = self.tf
            n_steps = self.n_steps or max(1, int(round((tf - self.t0) / p.half_period * self.steps_per_half)))
        return TimeGrid(t0=self.t0, tf=tf, n_steps=n_steps)


class SolverOptions(BaseModel):
    """Options of every solver; each solver reads the ones it knows."""

    model_config = ConfigDict(extra="forbid")

    tol: Optional[float] = Field(None, gt=0)
    truncation: List[int] = Field(default_factory=list)
    strict: bool = True
    n_traj: int = Field(1000, ge=1)
    seed: int = 0
    fourier_modes: int = Field(512, ge=1)
    batch_size: Optional[int] = Field(None, ge=1)
    frame: str = "lab"
    lamb_shift: bool = False
    rho0: str = "up"
    dynamic_form: str = "plateau"
    # NIBA only; the SSE phase factor always uses the Q1 plateau
    use_Q1_plateau: bool = False

    @field_validator("rho0")
    @classmethod
    def _known_state(cls, value: str) -> str:
        if value not in ("up", "down", "orbit", "partner", "mixed"):
            raise ValueError(f"unknown initial state {value!r}")
        return value


class SweepConfig(BaseModel):
    """Sweep axes: dotted parameter path -> values.

    ``product`` takes the Cartesian product of the axes; ``zip`` pairs them.
    """

    model_config = ConfigDict(extra="forbid")

    axes: Dict[str, List[SweepValue]]
    mode: SweepMode = SweepMode.PRODUCT

    @field_validator("axes")
    @classmethod
    def _check_axes(cls, axes: Dict[str, List[SweepValue]]) -> Dict[str, List[SweepValue]]:
        if not axes:
            raise ValueError("a sweep needs at least one axis")
        for name, values in axes.items():
            if not values:
                raise ValueError(f"sweep axis {name!r} is empty")
            if any(isinstance(x, float) and not math.isfinite(x) for x in values):
                raise ValueError(f"sweep axis {name!r} has non-finite values")
        return axes

    @model_validator(mode="after")
    def _check_zip(self) -> "SweepConfig":
        if self.mode is SweepMode.ZIP and len({len(v) for v in self.axes.values()}) > 1:
            raise ValueError("zipped sweep axes must have equal length")
        return self

    def points(self) -> List[Dict[str, SweepValue]]:
        names = list(self.axes)
        if self.mode is SweepMode.ZIP:
            combos = zip(*self.axes.values())
        else:
            combos = itertools.product(*self.axes.values())
        return [dict(zip(names, c)) for c in combos]


class ExperimentConfig(BaseModel):
    """One experiment: a solver, a model, a bath, a grid and an optional sweep."""

    model_config = ConfigDict(extra="forbid")

    solver: SolverKind
    preset: Optional[str] = None
    model: ModelParams
    bath: BathConfig = Field(default_factory=BathConfig)
    grid: GridConfig
    options: SolverOptions = Field(default_factory=SolverOptions)
    sweep: Optional[SweepConfig] = None
    out_dir: Optional[str] = None
    workers: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def _check_solver_bath(self) -> "ExperimentConfig":
        if self.solver is SolverKind.ED and self.bath.kind is BathKind.CONTINUUM:
            raise ValueError("the ED solver needs explicit or discretized modes")
        return self

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        """Validate a plain dictionary.

        Raises:
            ConfigValidationError: listing the dotted paths of every invalid entry
        """
        try:
            return cls.model_validate(data)
        except ValidationError as exc:
            keys = [".".join(str(part) for part in err["loc"]) or "<root>" for err in exc.errors()]
            details = "; ".join(f"{k}: {err['msg']}" for k, err in zip(keys, exc.errors()))
            raise ConfigValidationError(f"invalid configuration: {details}", keys=keys) from exc

    def canonical(self) -> Dict[str, Any]:
        """JSON form of everything that determines the results."""
        return self.model_dump(mode="json", exclude={"out_dir", "workers"})

    def point_configs(self) -> List[Tuple[Dict[str, SweepValue], "ExperimentConfig"]]:
        """Expand the sweep into single-point configurations."""
        if self.sweep is None:
            return [({}, self)]
        base = self.model_dump(mode="json", exclude={"sweep"})
        points = []
        for overrides in self.sweep.points():
            data = copy.deepcopy(base)
            for path, value in overrides.items():
                set_path(data, path, value)
            points.append((overrides, ExperimentConfig.from_dict(data)))
        return points


def set_path(data: Dict[str, Any], path: str, value: Any) -> None:
    """Assign ``value`` at a dotted path; integer parts index into lists."""
    parts = path.split(".")
    target: Any = data
    for part in parts[:-1]:
        target = target[int(part)] if isinstance(target, list) else target.setdefault(part, {})
    last = parts[-1]
    if isinstance(target, list):
        index = int(last)
        while len(target) <= index:
            target.append(None)
        target[index] = value
    else:
        target[last] = value


def config_hash(config: ExperimentConfig) -> str:
    """SHA-256 of the canonical JSON (sorted keys) of a configuration."""
    payload = json.dumps(config.canonical(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()
