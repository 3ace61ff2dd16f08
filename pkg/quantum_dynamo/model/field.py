"""Induced bath field reconstructed from the spin dynamics alone.

The field h(t) = <R(t)> obeys an exact linear-response identity: it is the
convolution of the bath memory kernel with <S(t)> = <sigma^z(t)>/2, plus a
free term fixed by the initial bath state. Nothing here needs the bath state
itself, so the same routines serve every solver.
"""

import logging
from typing import Optional, Union

import numpy as np
from scipy.signal import fftconvolve, lfilter
from scipy.special import sici

from quantum_dynamo.exceptions import ArgumentError
from quantum_dynamo.model.bath import memory_kernel, reorganization_field
from quantum_dynamo.model.params import Cutoff, ModelParams, ModeSet, Preparation
from quantum_dynamo.model.series import FieldTrajectory, SpinTrajectory

logger = logging.getLogger(__name__)

# omega * dt below which the product-integration weights use their Taylor series
_SERIES_CUTOFF = 1e-2
_COARSE_DERIVATIVE = 0.2


def _phi_weights(x: np.ndarray):
    """phi1 = (e^x - 1)/x and phi2 = (e^x (x - 1) + 1)/x^2 for complex x."""
    small = np.abs(x) < _SERIES_CUTOFF
    xs = np.where(small, 1.0, x)
    ex = np.exp(xs)
    phi1 = np.where(small, 1 + x / 2 + x**2 / 6 + x**3 / 24 + x**4 / 120, (ex - 1) / xs)
    phi2 = np.where(
        small,
        0.5 + x / 3 + x**2 / 8 + x**3 / 30 + x**4 / 144,
        (ex * (xs - 1) + 1) / xs**2,
    )
    return phi1, phi2


def _oscillatory_history(sz: np.ndarray, omegas: np.ndarray, dt: float) -> np.ndarray:
    """I_k(t_i) = int_0^{t_i} exp(i w_k (t_i - t')) sz(t') dt' per mode.

    sz is linearly interpolated between samples and the oscillating factor is
    integrated exactly, so the rule reduces to the trapezoid rule as w dt -> 0.
    """
    n = sz.size
    out = np.empty((n, omegas.size), dtype=complex)
    phases = np.exp(1j * np.multiply.outer(np.arange(n) * dt, omegas))
    for k, w in enumerate(omegas):
        x = np.asarray(1j * w * dt)
        phi1, phi2 = _phi_weights(x)
        w0 = dt * complex(phi2)
        w1 = dt * complex(phi1 - phi2)
        a = np.exp(complex(x))
        y = lfilter([w1, w0], [1.0, -a], sz.astype(complex))
        out[:, k] = y - phases[:, k] * w1 * sz[0]
    return out


def free_kernel(t: np.ndarray, p: ModelParams) -> np.ndarray:
    """int J(w)/(pi w) cos(w t) dw: the field relaxation of a displaced bath."""
    tt = np.asarray(t, dtype=float)
    if p.cutoff is Cutoff.EXPONENTIAL:
        return 2 * p.alpha * p.omega_c / (1 + (p.omega_c * tt) ** 2)
    x = p.omega_c * tt
    return 2 * p.alpha * p.omega_c * np.sinc(x / np.pi)


def mode_fields(
    traj: SpinTrajectory,
    ms: ModeSet,
    preparation: Preparation = Preparation.P1,
) -> np.ndarray:
    """Per-mode induced fields h_k(t), shape (n_points, n_modes).

    h_k(t) = -delta_1 (g_k^2/w_k) cos(w_k t) - g_k^2 int_0^t sin(w_k (t - t')) <sigma^z(t')> dt'
    """
    if len(traj) == 0:
        raise ArgumentError("empty trajectory")
    tau = traj.t - traj.grid.t0
    delta_1 = 1.0 if Preparation(preparation) is Preparation.P1 else 0.0
    g2 = ms.gs**2
    history = _oscillatory_history(traj.sz, ms.omegas, traj.grid.dt)
    free = -delta_1 * (g2 / ms.omegas) * np.cos(np.multiply.outer(tau, ms.omegas))
    return free - g2 * history.imag


def _continuum_convolution(traj: SpinTrajectory, p: ModelParams) -> np.ndarray:
    """Trapezoid rule for int_0^t K(t - t') <S(t')> dt' via FFT convolution."""
    dt = traj.grid.dt
    lags = np.arange(len(traj)) * dt
    kernel = memory_kernel(lags, p)
    source = traj.sz / 2
    full = fftconvolve(kernel, source)[: len(traj)]
    return dt * (full - 0.5 * kernel * source[0] - 0.5 * kernel[0] * source)


def induced_field_from_sz(
    traj: SpinTrajectory,
    source: Union[ModeSet, ModelParams],
    preparation: Optional[Preparation] = None,
) -> FieldTrajectory:
    """Reconstruct h(t) from <sigma^z(t)> by the exact kernel convolution.

    Args:
        traj: Spin trajectory starting at the preparation time
        source: Discrete bath or continuum parameters
        preparation: Initial bath state for a ModeSet source (defaults to P1;
            a ModelParams source carries its own)

    Returns:
        FieldTrajectory: h_total, with a free/adiabatic/dynamic split for mode sources
    """
    if len(traj) == 0:
        raise ArgumentError("empty trajectory")
    tau = traj.t - traj.grid.t0
    if isinstance(source, ModeSet):
        prep = Preparation(preparation or Preparation.P1)
        delta_1 = 1.0 if prep is Preparation.P1 else 0.0
        per_mode = mode_fields(traj, source, prep)
        h_total = per_mode.sum(axis=1)
        g2_w = source.gs**2 / source.omegas
        h_free = (traj.sz[0] - delta_1) * (np.cos(np.multiply.outer(tau, source.omegas)) @ g2_w)
        h_ad = -g2_w.sum() * traj.sz
        omega_max = source.omega_max
        return FieldTrajectory(
            grid=traj.grid,
            h_total=h_total,
            h_free=h_free,
            h_ad=h_ad,
            h_dyn=h_total - h_free - h_ad,
            per_mode=per_mode,
            metadata={"dt_omega_max": traj.grid.dt * omega_max, "source": "modes"},
        )

    p = source
    h_total = _continuum_convolution(traj, p) - p.delta_1 * free_kernel(tau, p)
    return FieldTrajectory(
        grid=traj.grid,
        h_total=h_total,
        metadata={"dt_omega_max": traj.grid.dt * p.omega_c, "source": "continuum"},
    )


def decompose_field_continuum(
    traj: SpinTrajectory,
    p: ModelParams,
    dynamic_form: str = "plateau",
) -> FieldTrajectory:
    """Split the continuum field into free, adiabatic and dynamic parts.

    h_free = (sz(0) - delta_1) int J/(pi w) cos(w t) dw, h_ad = -2 alpha omega_c sz,
    h_dyn = alpha pi d<sigma^z>/dt. With ``dynamic_form="short_time"`` the
    dynamic part keeps the finite-time kernel weights
    K0(t) d<sigma^z>/dt - K1(t) d^2<sigma^z>/dt^2.
    """
    if len(traj) == 0:
        raise ArgumentError("empty trajectory")
    tau = traj.t - traj.grid.t0
    flags = []
    if traj.sz_dot is None and traj.grid.dt * p.H > _COARSE_DERIVATIVE:
        flags.append("coarse_derivative")
        logger.warning("dt*H = %.3g: finite-difference sz_dot is inaccurate", traj.grid.dt * p.H)

    sz_dot = traj.sz_derivative()
    h_free = (traj.sz[0] - p.delta_1) * free_kernel(tau, p)
    h_ad = -reorganization_field(p) * traj.sz
    if dynamic_form == "plateau":
        h_dyn = p.alpha * np.pi * sz_dot
    elif dynamic_form == "short_time":
        sz_ddot = np.gradient(sz_dot, traj.grid.dt)
        x = p.omega_c * tau
        if p.cutoff is Cutoff.EXPONENTIAL:
            k0 = 2 * p.alpha * np.arctan(x)
            k1 = p.alpha / p.omega_c * np.log1p(x**2)
        else:
            k0 = 2 * p.alpha * sici(x)[0]
            k1 = 2 * p.alpha / p.omega_c * (1 - np.cos(x))
        h_dyn = k0 * sz_dot - k1 * sz_ddot
    else:
        raise ArgumentError(f"unknown dynamic_form {dynamic_form!r}")

    return FieldTrajectory(
        grid=traj.grid,
        h_total=h_free + h_ad + h_dyn,
        h_free=h_free,
        h_ad=h_ad,
        h_dyn=h_dyn,
        flags=tuple(flags),
        metadata={"dt_omega_max": traj.grid.dt * p.omega_c, "dynamic_form": dynamic_form},
    )


def integrated_dynamic_field(traj: SpinTrajectory, p: ModelParams, t_end: Optional[float] = None) -> float:
    """int_0^{t_end} h_dyn dt = alpha pi [sz(t_end) - sz(0)] (t_end defaults to pi/v).

    Over a half period this equals -2 alpha pi C_dyn.
    """
    t_end = p.half_period if t_end is None else t_end
    return p.alpha * np.pi * (traj.value_at(t_end) - traj.sz[0])
