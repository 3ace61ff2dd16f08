"""Parameter schemas for the driven spin-boson model."""

from enum import Enum
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from quantum_dynamo.exceptions import DomainError


class Cutoff(str, Enum):
    """High-frequency cutoff of the Ohmic spectral density."""

    EXPONENTIAL = "exponential"
    HARD = "hard"


class Preparation(str, Enum):
    """Initial condition of spin and bath.

    P1 starts from the joint ground state (bath displaced by the up spin),
    P2 from the factorized spin-up times vacuum state.
    """

    P1 = "P1"
    P2 = "P2"


class ModelParams(BaseModel):
    """Physical constants of the driven spin-boson Hamiltonian (hbar = 1)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    H: float = Field(1.0, gt=0, description="Field amplitude")
    v: float = Field(..., gt=0, description="Drive angular velocity")
    M: float = Field(0.0, description="Static bias along z")
    alpha: float = Field(0.0, ge=0, description="Dimensionless Ohmic coupling")
    omega_c: float = Field(100.0, gt=0, description="Cutoff frequency")
    cutoff: Cutoff = Cutoff.EXPONENTIAL
    preparation: Preparation = Preparation.P1

    @property
    def delta_1(self) -> float:
        """1 for the displaced preparation P1, 0 for the vacuum preparation P2."""
        return 1.0 if self.preparation is Preparation.P1 else 0.0

    @property
    def omega(self) -> float:
        """Rabi frequency of the rotating-frame Hamiltonian, sqrt(H^2 + v^2)."""
        return float(np.hypot(self.H, self.v))

    @property
    def half_period(self) -> float:
        return float(np.pi / self.v)

    def assert_scaling_limit(self) -> None:
        """Raise DomainError unless omega_c exceeds both H and v."""
        if self.omega_c <= max(self.H, self.v):
            raise DomainError(
                f"scaling limit requires omega_c > max(H, v), got omega_c={self.omega_c}"
            )

    def replace(self, **changes) -> "ModelParams":
        return self.model_copy(update=changes)


class TimeGrid(BaseModel):
    """Uniform time grid t0, t0 + dt, ..., tf."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    t0: float = 0.0
    tf: float
    n_steps: int = Field(..., ge=1)

    @model_validator(mode="after")
    def _check_span(self) -> "TimeGrid":
        if not self.tf > self.t0:
            raise ValueError(f"tf must exceed t0 (t0={self.t0}, tf={self.tf})")
        return self

    @property
    def dt(self) -> float:
        return (self.tf - self.t0) / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t0, self.tf, self.n_steps + 1)

    @property
    def n_points(self) -> int:
        return self.n_steps + 1

    @classmethod
    def half_periods(cls, v: float, n_half: float, steps_per_half: int) -> "TimeGrid":
        """Grid from 0 to n_half * pi / v with a fixed density per half period."""
        return cls(tf=n_half * np.pi / v, n_steps=max(1, int(round(n_half * steps_per_half))))


class Mode(BaseModel):
    """A single bosonic bath mode."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    omega: float = Field(..., gt=0)
    g: float = Field(..., ge=0)
    delta_omega: float = Field(0.0, ge=0)


class ModeSet(BaseModel):
    """Discrete bath, ordered by strictly increasing frequency."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    modes: Tuple[Mode, ...]

    @field_validator("modes")
    @classmethod
    def _check_ordering(cls, modes: Tuple[Mode, ...]) -> Tuple[Mode, ...]:
        if len(modes) == 0:
            raise ValueError("a mode set needs at least one mode")
        freqs = [m.omega for m in modes]
        if any(b <= a for a, b in zip(freqs, freqs[1:])):
            raise ValueError("mode frequencies must be strictly increasing")
        return modes

    @classmethod
    def single(cls, omega: float, g: float) -> "ModeSet":
        return cls(modes=(Mode(omega=omega, g=g),))

    @classmethod
    def from_arrays(
        cls, omegas: List[float], gs: List[float], widths: List[float] = None
    ) -> "ModeSet":
        if widths is None:
            widths = [0.0] * len(omegas)
        return cls(
            modes=tuple(
                Mode(omega=float(w), g=float(g), delta_omega=float(d))
                for w, g, d in zip(omegas, gs, widths)
            )
        )

    def __len__(self) -> int:
        return len(self.modes)

    @property
    def omegas(self) -> np.ndarray:
        return np.array([m.omega for m in self.modes])

    @property
    def gs(self) -> np.ndarray:
        return np.array([m.g for m in self.modes])

    @property
    def widths(self) -> np.ndarray:
        return np.array([m.delta_omega for m in self.modes])

    @property
    def omega_max(self) -> float:
        return float(self.modes[-1].omega)

    @property
    def reorganization(self) -> float:
        """Sum of g_k^2 / omega_k, the adiabatic field per unit <sigma_z>."""
        return float(np.sum(self.gs**2 / self.omegas))
