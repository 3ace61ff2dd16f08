"""Ohmic spectral densities, memory kernels and bath discretization."""

import logging
from enum import Enum
from typing import Callable, Union

import numpy as np

from quantum_dynamo.exceptions import ArgumentError, DomainError
from quantum_dynamo.model.params import Cutoff, Mode, ModelParams, ModeSet

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# Below this value of omega_c * t the hard-cutoff kernel uses its Taylor series.
_HARD_SERIES_X = 1e-3


class DiscretizationScheme(str, Enum):
    LINEAR = "linear"


def spectral_density(omega: ArrayLike, p: ModelParams) -> ArrayLike:
    """Ohmic spectral density J(omega).

    Exponential cutoff: 2 pi alpha omega exp(-omega/omega_c).
    Hard cutoff: 2 pi alpha omega for omega <= omega_c, zero above.

    Raises:
        DomainError: if any omega is negative
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise DomainError("spectral density is defined for omega >= 0 only")
    if p.cutoff is Cutoff.EXPONENTIAL:
        out = 2 * np.pi * p.alpha * w * np.exp(-w / p.omega_c)
    else:
        out = np.where(w <= p.omega_c, 2 * np.pi * p.alpha * w, 0.0)
    return out if out.ndim else float(out)


def memory_kernel(t: ArrayLike, p: ModelParams) -> ArrayLike:
    """Continuum kernel K(t) = -(2/pi) int J(w) sin(wt) dw, odd in t."""
    tt = np.asarray(t, dtype=float)
    wc = p.omega_c
    if p.cutoff is Cutoff.EXPONENTIAL:
        out = -8 * p.alpha * wc**3 * tt / (1 + (wc * tt) ** 2) ** 2
    else:
        x = wc * np.abs(tt)
        with np.errstate(divide="ignore", invalid="ignore"):
            core = (np.sin(x) - x * np.cos(x)) / x**2
        core = np.where(x < _HARD_SERIES_X, x / 3 - x**3 / 30, core)
        out = -4 * p.alpha * wc**2 * np.sign(tt) * core
    return out if out.ndim else float(out)


def mode_kernel(t: ArrayLike, ms: ModeSet) -> ArrayLike:
    """Discrete-bath kernel K(t) = -2 sum_k g_k^2 sin(omega_k t)."""
    tt = np.asarray(t, dtype=float)
    out = -2 * np.sin(np.multiply.outer(tt, ms.omegas)) @ (ms.gs**2)
    return out if np.ndim(out) else float(out)


def kernel_for(source: Union[ModeSet, ModelParams]) -> Callable[[ArrayLike], ArrayLike]:
    """Kernel function matching an induced-field source."""
    if isinstance(source, ModeSet):
        return lambda t: mode_kernel(t, source)
    return lambda t: memory_kernel(t, source)


def reorganization_field(p: ModelParams) -> float:
    """int J(w)/(pi w) dw, equal to 2 alpha omega_c for both cutoffs."""
    return 2 * p.alpha * p.omega_c


def discretize_bath(
    p: ModelParams,
    n_modes: int,
    omega_max: float,
    scheme: DiscretizationScheme = DiscretizationScheme.LINEAR,
) -> ModeSet:
    """Split (0, omega_max] into equal bins and place one mode per bin midpoint.

    Couplings follow g_k^2 = 2 alpha omega_k delta_omega_k, so the discrete
    kernel converges to the hard-cutoff continuum kernel with omega_c = omega_max.

    Args:
        p: Model parameters (only alpha is used)
        n_modes: Number of modes
        omega_max: Upper frequency of the discretized band
        scheme: Discretization scheme

    Returns:
        ModeSet: The discrete bath
    """
    if n_modes < 1:
        raise ArgumentError("discretize_bath needs n_modes >= 1")
    if omega_max <= 0:
        raise ArgumentError("omega_max must be positive")
    scheme = DiscretizationScheme(scheme)
    width = omega_max / n_modes
    centers = (np.arange(n_modes) + 0.5) * width
    couplings = np.sqrt(2 * p.alpha * centers * width)
    logger.debug("discretized bath: %d modes, width %.4g", n_modes, width)
    return ModeSet(
        modes=tuple(
            Mode(omega=float(w), g=float(g), delta_omega=width)
            for w, g in zip(centers, couplings)
        )
    )


class BathCorrelation:
    """Zero-temperature Ohmic bath correlation integrals Q1 and Q2.

    Q1(t) = 2 pi alpha arctan(omega_c t), replaced by its plateau pi^2 alpha
    for t > 0 when ``use_Q1_plateau`` is set. Q2(t) = pi alpha log(1 + omega_c^2 t^2).
    """

    def __init__(self, alpha: float, omega_c: float, use_Q1_plateau: bool = True):
        self.alpha = alpha
        self.omega_c = omega_c
        self.use_Q1_plateau = use_Q1_plateau

    @classmethod
    def from_params(cls, p: ModelParams, use_Q1_plateau: bool = True) -> "BathCorrelation":
        return cls(p.alpha, p.omega_c, use_Q1_plateau)

    @property
    def q1_plateau(self) -> float:
        return np.pi**2 * self.alpha

    def Q1(self, t: ArrayLike) -> ArrayLike:
        tt = np.asarray(t, dtype=float)
        if self.use_Q1_plateau:
            out = self.q1_plateau * np.sign(tt)
        else:
            out = 2 * np.pi * self.alpha * np.arctan(self.omega_c * tt)
        return out if out.ndim else float(out)

    def Q2(self, t: ArrayLike) -> ArrayLike:
        tt = np.asarray(t, dtype=float)
        out = np.pi * self.alpha * np.log1p((self.omega_c * tt) ** 2)
        return out if out.ndim else float(out)
