"""Closed-form references for the driven spin-boson model.

These formulas serve three purposes: oracles for the numerical solvers, fast
predictors for parameter scans, and the analytic columns of the CLI tables.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import gammaln, xlogy

from quantum_dynamo.exceptions import DomainError
from quantum_dynamo.model.bath import spectral_density
from quantum_dynamo.model.params import ModelParams, Preparation

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

RESONANCE_TOL = 1e-9


class OneModeParams(BaseModel):
    """A single bath mode coupled to the driven spin."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    omega: float = Field(..., gt=0)
    g: float = Field(..., ge=0)
    H: float = Field(1.0, gt=0)
    v: float = Field(..., gt=0)
    preparation: Preparation = Preparation.P1

    @property
    def delta_1(self) -> float:
        return 1.0 if self.preparation is Preparation.P1 else 0.0

    @property
    def resonant(self) -> bool:
        return abs(self.omega - self.v) < RESONANCE_TOL * self.v


class KondoParams(BaseModel):
    """Tunneling element and bath constants entering the Kondo mapping."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    Delta: float = Field(..., ge=0)
    alpha: float = Field(..., ge=0)
    omega_c: float = Field(..., gt=0)

    @property
    def b(self) -> float:
        """alpha log alpha + (1 - alpha) log(1 - alpha)."""
        return float(xlogy(self.alpha, self.alpha) + xlogy(1 - self.alpha, 1 - self.alpha))


@dataclass(frozen=True)
class DynamoPredictions:
    """Weak-coupling stationary predictions for the continuum dynamo."""

    W_flow: float
    dE_dyn_half: float
    C_dyn: float
    dE_dyn_topological: float
    dE_dyn_one_mode: Optional[float] = None


def free_spin(t: ArrayLike, H: float, v: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Bloch vector of the uncoupled spin starting up, field rotating in the x-z plane."""
    t = np.asarray(t, dtype=float)
    W = np.hypot(H, v)
    s, c = np.sin(v * t), np.cos(v * t)
    sW, cW = np.sin(W * t), np.cos(W * t)
    sx = (H**2 / W**2) * s - (v / W) * c * sW + (v**2 / W**2) * s * cW
    sy = 2 * v * H / W**2 * np.sin(W * t / 2) ** 2
    sz = (H**2 / W**2) * c + (v / W) * s * sW + (v**2 / W**2) * c * cW
    return sx, sy, sz


def free_spin_sz_dot(t: ArrayLike, H: float, v: float) -> np.ndarray:
    """Heisenberg derivative d<sigma^z>/dt = -H sin(vt) <sigma^y> of the free spin."""
    _, sy, _ = free_spin(t, H, v)
    return -H * np.sin(v * np.asarray(t, dtype=float)) * sy


def one_mode_weak_field(t: ArrayLike, pm: OneModeParams) -> np.ndarray:
    """Induced field of one mode for a spin following the field adiabatically.

    Off resonance the mode is driven at the drive frequency; at omega = v the
    amplitude grows linearly in time.
    """
    t = np.asarray(t, dtype=float)
    g2, w, v = pm.g**2, pm.omega, pm.v
    if pm.resonant:
        return -0.5 * g2 * t * np.sin(v * t) - pm.delta_1 * (g2 / v) * np.cos(v * t)
    pref = g2 * w / (w**2 - v**2)
    if pm.preparation is Preparation.P1:
        return pref * ((v**2 / w**2) * np.cos(w * t) - np.cos(v * t))
    return pref * (np.cos(w * t) - np.cos(v * t))


def one_mode_energies(t: ArrayLike, pm: OneModeParams) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Weak-coupling (dE_dyn, W_dr, dE_fluct) for a mode resonant with the drive.

    Raises:
        DomainError: if the mode is not resonant
    """
    if not pm.resonant:
        raise DomainError(f"one_mode_energies needs omega = v, got omega={pm.omega}, v={pm.v}")
    t = np.asarray(t, dtype=float)
    g2, v, d1 = pm.g**2, pm.v, pm.delta_1
    ramp = 2 * v**2 * t**2 - 2 * v * t * np.sin(2 * v * t)
    osc = 1 - np.cos(2 * v * t)
    e_dyn = g2 / (32 * v) * ((4 * d1 - 3) * osc + ramp)
    w_dr = g2 / (32 * v) * ((1 + 4 * d1) * osc + ramp)
    e_fluct = g2 / (4 * v) * np.sin(v * t) ** 2
    return e_dyn, w_dr, e_fluct


def one_mode_weak_energy_dis(t: ArrayLike, pm: OneModeParams) -> np.ndarray:
    """dE_dis = dE_dyn - d(h<S>) - (g^2/omega) d<S>^2 with <S> = cos(vt)/2."""
    t = np.asarray(t, dtype=float)
    e_dyn, _, _ = one_mode_energies(t, pm)
    h = one_mode_weak_field(t, pm)
    h0 = float(one_mode_weak_field(0.0, pm))
    s = np.cos(pm.v * t) / 2
    return e_dyn - (h * s - h0 / 2) - (pm.g**2 / pm.omega) * (s**2 - 0.25)


def frozen_field(t: ArrayLike, pm: OneModeParams) -> np.ndarray:
    """Field of one mode when strong coupling pins the spin up."""
    t = np.asarray(t, dtype=float)
    return -(pm.g**2 / pm.omega) * (1 + (pm.delta_1 - 1) * np.cos(pm.omega * t))


def renormalized_tunneling(k: KondoParams) -> float:
    """Delta_r = Delta (Delta/omega_c)^(alpha/(1-alpha))."""
    if k.alpha >= 1:
        raise DomainError("renormalized tunneling needs alpha < 1")
    return k.Delta * (k.Delta / k.omega_c) ** (k.alpha / (1 - k.alpha))


def _check_bethe_range(alpha: float) -> None:
    if not 0 < alpha < 0.5:
        raise DomainError(f"Bethe-ansatz formulas need 0 < alpha < 1/2, got {alpha}")


def kondo_scale(k: KondoParams) -> Tuple[float, float, float]:
    """Return (D, T_K, b) of the anisotropic Kondo mapping.

    D is the Kondo-model bandwidth matched to omega_c and
    T_K = Delta (Delta/D)^(alpha/(1-alpha)).
    """
    a = k.alpha
    _check_bethe_range(a)
    b = k.b
    log_ratio = (
        np.log(2)
        + gammaln(1.5 - a)
        - b
        - 0.5 * np.log(np.pi)
        - np.log(1 - 2 * a)
        - gammaln(1 - 2 * a)
        - gammaln(1 - a)
    )
    D = k.omega_c * np.exp(log_ratio / (2 * a))
    T_K = k.Delta * (k.Delta / D) ** (a / (1 - a))
    return float(D), float(T_K), b


def bethe_c1(alpha: float) -> float:
    """Prefactor C1(alpha) of the Kondo term in <sigma^x>."""
    _check_bethe_range(alpha)
    b = KondoParams(Delta=0.0, alpha=alpha, omega_c=1.0).b
    s = 2 - 2 * alpha
    log_c1 = (
        -b / s
        - 0.5 * np.log(np.pi)
        - np.log(1 - alpha)
        + gammaln(1 - 1 / s)
        - gammaln(1 - alpha / s)
    )
    return float(np.exp(log_c1))


def bethe_sx(k: KondoParams) -> float:
    """Small-bias ground-state <sigma^x> of the Ohmic spin-boson model.

    <sigma^x> = Delta/((2 alpha - 1) omega_c) + C1(alpha) T_K / Delta
    """
    if k.alpha == 0.5:
        raise DomainError("bethe_sx is singular at alpha = 1/2")
    _, T_K, _ = kondo_scale(k)
    kondo_term = 0.0 if k.Delta == 0 else bethe_c1(k.alpha) * T_K / k.Delta
    return k.Delta / ((2 * k.alpha - 1) * k.omega_c) + kondo_term


def adiabatic_renormalized_sz(t: ArrayLike, p: ModelParams) -> np.ndarray:
    """Ground-state <sigma^z> in the field (H cos vt + M, Delta_r(t)).

    The tunneling element Delta(t) = H sin(vt) is replaced by its renormalized
    value, so the spin lags the field where |Delta| is small.
    """
    if p.alpha >= 1:
        raise DomainError("adiabatic_renormalized_sz needs alpha < 1")
    t = np.asarray(t, dtype=float)
    delta = p.H * np.abs(np.sin(p.v * t))
    delta_r = delta * (delta / p.omega_c) ** (p.alpha / (1 - p.alpha))
    eps = p.H * np.cos(p.v * t) + p.M
    return eps / np.hypot(eps, delta_r)


def orbit_state(t: ArrayLike, H: float, v: float) -> np.ndarray:
    """Amplitudes (up, down) of the stable periodic orbit |Psi_-(t)>, shape (..., 2)."""
    t = np.asarray(t, dtype=float)
    W = np.hypot(H, v)
    a = np.sqrt((W + H) / (2 * W))
    b = np.sqrt((W - H) / (2 * W))
    c, s = np.cos(v * t / 2), np.sin(v * t / 2)
    up = a * c - 1j * b * s
    down = 1j * b * c + a * s
    return np.stack([up, down], axis=-1)


def orbit_partner(t: ArrayLike, H: float, v: float) -> np.ndarray:
    """Amplitudes of the orthogonal orbit |Psi_+(t)>."""
    psi = orbit_state(t, H, v)
    return np.stack([-np.conj(psi[..., 1]), np.conj(psi[..., 0])], axis=-1)


def gkls_orbit(t: ArrayLike, H: float, v: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Bloch coordinates (H/W sin vt, v/W, H/W cos vt) of the stationary orbit."""
    t = np.asarray(t, dtype=float)
    W = np.hypot(H, v)
    return H / W * np.sin(v * t), np.full_like(t, v / W), H / W * np.cos(v * t)


def dynamo_predictions(p: ModelParams, g: Optional[float] = None) -> DynamoPredictions:
    """Stationary work flow, half-period dynamo energy and C_dyn in weak coupling.

    Args:
        p: Model parameters (continuum bath)
        g: Optional one-mode coupling for the single-mode topological form

    Returns:
        DynamoPredictions: W_flow = v H^2 J(v)/(8 W^2), dE_dyn_half = alpha pi^2 v H^2/(4 W^2),
        C_dyn = H/W, and the topological forms
    """
    W2 = p.H**2 + p.v**2
    c_dyn = p.H / np.sqrt(W2)
    w_flow = p.v * p.H**2 * spectral_density(p.v, p) / (8 * W2)
    de_half = p.alpha * np.pi**2 * p.v * p.H**2 / (4 * W2)
    de_topo = p.alpha * np.pi**2 * p.v / 4 * c_dyn**2
    de_one = None if g is None else g**2 * np.pi**2 / (16 * p.v) * c_dyn**2
    return DynamoPredictions(
        W_flow=float(w_flow),
        dE_dyn_half=float(de_half),
        C_dyn=float(c_dyn),
        dE_dyn_topological=float(de_topo),
        dE_dyn_one_mode=None if de_one is None else float(de_one),
    )
