"""Time-series containers shared by all solvers."""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np
import pandas as pd

from quantum_dynamo.exceptions import ArgumentError
from quantum_dynamo.model.params import TimeGrid


def _as_series(values, n: int, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.shape != (n,):
        raise ArgumentError(f"{name} has shape {arr.shape}, expected ({n},)")
    return arr


@dataclass
class SpinTrajectory:
    """Spin expectation values <sigma^x,y,z> sampled on a uniform grid.

    ``sz_dot`` is filled by solvers that know the exact derivative; otherwise
    :meth:`sz_derivative` falls back to finite differences. ``w_dr`` holds the
    drive work when the integrator accumulated it alongside the state.
    ``extra_columns`` are solver-specific series appended to the CSV table.
    """

    grid: TimeGrid
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray
    sz_dot: Optional[np.ndarray] = None
    w_dr: Optional[np.ndarray] = None
    flags: Tuple[str, ...] = ()
    metadata: Dict[str, Any] = field(default_factory=dict)
    extra_columns: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        n = self.grid.n_points
        self.sx = _as_series(self.sx, n, "sx")
        self.sy = _as_series(self.sy, n, "sy")
        self.sz = _as_series(self.sz, n, "sz")
        if self.sz_dot is not None:
            self.sz_dot = _as_series(self.sz_dot, n, "sz_dot")
        if self.w_dr is not None:
            self.w_dr = _as_series(self.w_dr, n, "w_dr")

    @property
    def t(self) -> np.ndarray:
        return self.grid.times

    def __len__(self) -> int:
        return self.grid.n_points

    def sz_derivative(self) -> np.ndarray:
        """d<sigma^z>/dt: the stored exact series, else central differences."""
        if self.sz_dot is not None:
            return self.sz_dot
        return np.gradient(self.sz, self.grid.dt)

    def bloch_excess(self) -> float:
        """Largest violation of sx^2 + sy^2 + sz^2 <= 1 (0 when none)."""
        r2 = self.sx**2 + self.sy**2 + self.sz**2
        return float(max(0.0, np.nanmax(r2) - 1.0))

    def value_at(self, t: float, series: str = "sz") -> float:
        """Linear interpolation of one series at time t."""
        return float(np.interp(t, self.t, getattr(self, series)))

    def with_flags(self, *flags: str) -> "SpinTrajectory":
        self.flags = tuple(dict.fromkeys(self.flags + flags))
        return self

    def to_frame(self) -> pd.DataFrame:
        data = {"t": self.t, "sx": self.sx, "sy": self.sy, "sz": self.sz}
        data["sz_dot"] = self.sz_derivative()
        for name, values in self.extra_columns.items():
            data[name] = values
        return pd.DataFrame(data)


@dataclass
class FieldTrajectory:
    """Induced bath field h(t) and, when computed, its decomposition.

    ``h_total = h_free + h_ad + h_dyn`` wherever all parts are present.
    """

    grid: TimeGrid
    h_total: np.ndarray
    h_free: Optional[np.ndarray] = None
    h_ad: Optional[np.ndarray] = None
    h_dyn: Optional[np.ndarray] = None
    per_mode: Optional[np.ndarray] = None
    flags: Tuple[str, ...] = ()
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        n = self.grid.n_points
        self.h_total = _as_series(self.h_total, n, "h_total")
        for name in ("h_free", "h_ad", "h_dyn"):
            value = getattr(self, name)
            if value is not None:
                setattr(self, name, _as_series(value, n, name))

    @property
    def t(self) -> np.ndarray:
        return self.grid.times

    @property
    def decomposed(self) -> bool:
        return all(getattr(self, n) is not None for n in ("h_free", "h_ad", "h_dyn"))

    def to_frame(self) -> pd.DataFrame:
        data = {"t": self.t, "h_total": self.h_total}
        for name in ("h_free", "h_ad", "h_dyn"):
            value = getattr(self, name)
            if value is not None:
                data[name] = value
        if self.per_mode is not None:
            for k in range(self.per_mode.shape[1]):
                data[f"h_mode_{k}"] = self.per_mode[:, k]
        return pd.DataFrame(data)
