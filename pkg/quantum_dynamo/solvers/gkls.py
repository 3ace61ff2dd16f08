"""Floquet-Markov (GKLS) master equation for the weakly damped driven spin.

The spin Hamiltonian H_S(t) = -(H/2)(cos vt sigma^z + sin vt sigma^x) is the
rotation U(t) = exp(-i vt sigma^y / 2) of the static -(H/2) sigma^z. In the
frame of U the generator is time independent:

    H_eff = -(H/2) sigma^z - (v/2) sigma^y

and its eigenvectors, rotated back, are the periodic orbits |Psi_-(t)>
(stable) and |Psi_+(t)>. Dissipation relaxes |Psi_+> onto |Psi_-> and
dephases in the orbit basis.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.integrate import quad, trapezoid
from scipy.linalg import expm

from quantum_dynamo.analytic import dynamo_predictions, orbit_partner, orbit_state
from quantum_dynamo.exceptions import DomainError, IntegrationError
from quantum_dynamo.model.bath import spectral_density
from quantum_dynamo.model.params import Cutoff, ModelParams, TimeGrid
from quantum_dynamo.model.series import SpinTrajectory
from quantum_dynamo.settings import settings
from quantum_dynamo.solvers.stepping import sample_on_grid

logger = logging.getLogger(__name__)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)

STATE_TOL = 1e-8
TRACE_TOL = 1e-10
WEAK_COUPLING_RATIO = 0.1


class Frame(str, Enum):
    """Frame in which the master equation is integrated."""

    LAB = "lab"
    ROTATING = "rotating"


@dataclass
class DensityMatrix2:
    """Validated 2x2 spin density matrix."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise DomainError(f"density matrix must be 2x2, got {m.shape}")
        if not np.allclose(m, m.conj().T, atol=STATE_TOL):
            raise DomainError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > STATE_TOL:
            raise DomainError(f"density matrix has trace {np.trace(m).real:.12g}")
        if np.linalg.eigvalsh(m).min() < -STATE_TOL:
            raise DomainError("density matrix has a negative eigenvalue")
        self.matrix = m

    @classmethod
    def pure(cls, psi) -> "DensityMatrix2":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def from_bloch(cls, sx: float, sy: float, sz: float) -> "DensityMatrix2":
        return cls(0.5 * (IDENTITY + sx * SIGMA_X + sy * SIGMA_Y + sz * SIGMA_Z))

    @classmethod
    def spin_up(cls) -> "DensityMatrix2":
        return cls.pure([1.0, 0.0])

    @property
    def bloch(self) -> Tuple[float, float, float]:
        return bloch_vector(self.matrix)


def bloch_vector(rho: np.ndarray) -> Tuple[float, float, float]:
    return (
        float(2 * rho[0, 1].real),
        float(-2 * rho[0, 1].imag),
        float((rho[0, 0] - rho[1, 1]).real),
    )


@dataclass(frozen=True)
class GKLSRates:
    """Relaxation and dephasing rates, optional Lamb shift and diagnostics.

    ``lamb_shift`` is the energy shift of |Psi_+> relative to |Psi_->.
    """

    gamma_relax: float
    gamma_deph: float
    lamb_shift: float = 0.0
    weak_coupling: bool = True
    channel_frequencies: Tuple[float, float] = (0.0, 0.0)


def _principal_value(p: ModelParams, nu: float) -> float:
    """P int_0^inf J(w) / (w - nu) dw."""
    upper = 60.0 * p.omega_c if p.cutoff is Cutoff.EXPONENTIAL else p.omega_c
    if nu >= upper:
        raise DomainError(f"channel frequency {nu} lies beyond the spectral support")
    value, _ = quad(lambda w: spectral_density(w, p), 0.0, upper, weight="cauchy", wvar=nu, limit=400)
    return float(value)


def build_rates(p: ModelParams, lamb_shift: bool = False) -> GKLSRates:
    """Zero-temperature rates of the Floquet-Markov generator.

    gamma_relax = sum_l (W - l v)^2 J(W + l v) / (4 W^2) over l = +1, -1 with
    W = sqrt(H^2 + v^2), and gamma_deph = J(v) H^2 / (4 W^2).

    Args:
        p: Model parameters (M = 0)
        lamb_shift: Compute the principal-value level shift

    Returns:
        GKLSRates: rates plus a weak-coupling diagnostic
    """
    if p.M != 0:
        raise DomainError("the Floquet-Markov generator is built for M = 0")
    W, v = p.omega, p.v
    freqs = (W + v, W - v)
    weights = ((W - v) ** 2 / (4 * W**2), (W + v) ** 2 / (4 * W**2))
    j = [float(spectral_density(nu, p)) for nu in freqs]
    gamma_relax = sum(c * jj for c, jj in zip(weights, j))
    gamma_deph = float(spectral_density(v, p)) * p.H**2 / (4 * W**2)

    largest = max(j + [float(spectral_density(v, p))])
    weak = largest <= WEAK_COUPLING_RATIO * min(v, W)
    if not weak:
        logger.warning("weak-coupling diagnostic violated: J = %.3g against v = %.3g", largest, v)

    shift = 0.0
    if lamb_shift:
        shift = -sum(c * _principal_value(p, nu) for c, nu in zip(weights, freqs) if nu > 0) / (2 * np.pi)
        logger.debug("Lamb shift %.6g", shift)
    return GKLSRates(
        gamma_relax=float(gamma_relax),
        gamma_deph=float(gamma_deph),
        lamb_shift=float(shift),
        weak_coupling=bool(weak),
        channel_frequencies=freqs,
    )


def _frame_rotation(t: float, v: float) -> np.ndarray:
    return np.cos(v * t / 2) * IDENTITY - 1j * np.sin(v * t / 2) * SIGMA_Y


def _dissipator(x: np.ndarray, rho: np.ndarray) -> np.ndarray:
    xdx = x.conj().T @ x
    return x @ rho @ x.conj().T - 0.5 * (xdx @ rho + rho @ xdx)


class _Generator:
    """Rotating-frame operators and the lab-frame right-hand side."""

    def __init__(self, p: ModelParams, rates: GKLSRates):
        self.p = p
        self.rates = rates
        minus = orbit_state(0.0, p.H, p.v)
        plus = orbit_partner(0.0, p.H, p.v)
        self.proj_minus = np.outer(minus, minus.conj())
        self.proj_plus = np.outer(plus, plus.conj())
        self.jump = np.outer(minus, plus.conj())
        self.deph = self.proj_plus - self.proj_minus
        self.h_eff = -0.5 * (p.H * SIGMA_Z + p.v * SIGMA_Y) + rates.lamb_shift * self.proj_plus
        self.h_ls = rates.lamb_shift * self.proj_plus

    def hamiltonian(self, t: float) -> np.ndarray:
        p = self.p
        return -0.5 * p.H * (np.cos(p.v * t) * SIGMA_Z + np.sin(p.v * t) * SIGMA_X)

    def lab_derivative(self, t: float, rho: np.ndarray) -> np.ndarray:
        u = _frame_rotation(t, self.p.v)
        ud = u.conj().T
        h = self.hamiltonian(t) + u @ self.h_ls @ ud
        out = -1j * (h @ rho - rho @ h)
        if self.rates.gamma_relax:
            out += self.rates.gamma_relax * _dissipator(u @ self.jump @ ud, rho)
        if self.rates.gamma_deph:
            out += self.rates.gamma_deph * _dissipator(u @ self.deph @ ud, rho)
        return out

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        return self.lab_derivative(t, y.reshape(2, 2)).ravel()

    def liouvillian(self) -> np.ndarray:
        """Rotating-frame superoperator on the row-major vectorized rho."""

        def left(a):
            return np.kron(a, IDENTITY)

        def right(a):
            return np.kron(IDENTITY, a.T)

        h = self.h_eff
        out = -1j * (left(h) - right(h))
        for rate, x in ((self.rates.gamma_relax, self.jump), (self.rates.gamma_deph, self.deph)):
            xdx = x.conj().T @ x
            out += rate * (np.kron(x, x.conj()) - 0.5 * (left(xdx) + right(xdx)))
        return out


def _check_state(t: float, rho: np.ndarray) -> None:
    if abs(np.trace(rho) - 1) > 1e3 * TRACE_TOL:
        raise IntegrationError(f"trace drifted to {np.trace(rho).real:.12g} at t={t:.6g}")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -STATE_TOL:
        raise IntegrationError(f"density matrix lost positivity at t={t:.6g}; tighten the tolerance")


def propagate_gkls(
    rho0: DensityMatrix2,
    p: ModelParams,
    grid: TimeGrid,
    frame: Frame = Frame.LAB,
    rates: Optional[GKLSRates] = None,
    tol: Optional[float] = None,
) -> SpinTrajectory:
    """Integrate the master equation from rho0 at grid.t0.

    Lab-frame runs use DOP853 on the explicitly time-dependent generator;
    rotating-frame runs exponentiate the constant Liouvillian once per step.

    Raises:
        IntegrationError: if positivity is lost beyond 1e-8
    """
    rates = rates or build_rates(p)
    gen = _Generator(p, rates)
    times = grid.times
    flags: List[str] = [] if rates.weak_coupling else ["weak_coupling_violated"]

    if Frame(frame) is Frame.LAB:
        tol = tol or min(settings.tol, 1e-10)

        def observe(t: float, y: np.ndarray):
            rho = y.reshape(2, 2).copy()
            return rho, gen.lab_derivative(t, rho)

        samples, n_steps = sample_on_grid(gen.rhs, rho0.matrix.ravel(), times, observe, rtol=tol, atol=tol * 1e-2)
        rhos = [s[0] for s in samples]
        derivs = [s[1] for s in samples]
    else:
        step = expm(gen.liouvillian() * grid.dt)
        u0 = _frame_rotation(times[0], p.v)
        vec = (u0.conj().T @ rho0.matrix @ u0).ravel()
        rhos, derivs = [], []
        for t in times:
            u = _frame_rotation(t, p.v)
            rho = u @ vec.reshape(2, 2) @ u.conj().T
            rhos.append(rho)
            derivs.append(gen.lab_derivative(t, rho))
            vec = step @ vec
        n_steps = len(times) - 1

    for t, rho in zip(times, rhos):
        _check_state(t, rho)
    bloch = np.array([bloch_vector(r) for r in rhos])
    sz_dot = np.array([(d[0, 0] - d[1, 1]).real for d in derivs])
    logger.info("GKLS (%s frame): %d steps, gamma_relax=%.4g", Frame(frame).value, n_steps, rates.gamma_relax)
    return SpinTrajectory(
        grid=grid,
        sx=bloch[:, 0],
        sy=bloch[:, 1],
        sz=bloch[:, 2],
        sz_dot=sz_dot,
        flags=tuple(flags),
        metadata={"solver": "gkls", "frame": Frame(frame).value},
    )


def orbit_distance(traj: SpinTrajectory, p: ModelParams) -> np.ndarray:
    """Trace distance |r - r_orbit| / 2 to the stable periodic orbit."""
    W = p.omega
    t = traj.t
    dx = traj.sx - p.H / W * np.sin(p.v * t)
    dy = traj.sy - p.v / W
    dz = traj.sz - p.H / W * np.cos(p.v * t)
    return 0.5 * np.sqrt(dx**2 + dy**2 + dz**2)


def orbit_residual(p: ModelParams, times: np.ndarray, rates: Optional[GKLSRates] = None) -> np.ndarray:
    """Largest entry of L[rho_orbit(t)] - d rho_orbit/dt at each time.

    The orbit moves by the frame rotation alone, so any component of the
    generator beyond -i[(v/2) sigma_y, rho] shows up here.
    """
    gen = _Generator(p, rates or build_rates(p))
    out = np.empty(len(times))
    for i, t in enumerate(np.asarray(times, dtype=float)):
        psi = orbit_state(t, p.H, p.v)
        rho = np.outer(psi, psi.conj())
        along = -0.5j * p.v * (SIGMA_Y @ rho - rho @ SIGMA_Y)
        out[i] = np.max(np.abs(gen.lab_derivative(t, rho) - along))
    return out


def stationary_energetics(p: ModelParams) -> Tuple[float, float, float]:
    """(W_flow, dE_dyn over a half period, long-time efficiency).

    The efficiency dE_dyn / (W_flow pi / v) is 1 in the scaling limit: exactly
    for the hard cutoff and e^{v/omega_c} for the exponential one.
    """
    pred = dynamo_predictions(p)
    denominator = pred.W_flow * p.half_period
    eta = pred.dE_dyn_half / denominator if denominator > 0 else float("nan")
    return pred.W_flow, pred.dE_dyn_half, float(eta)


def stationary_power(traj: SpinTrajectory, p: ModelParams) -> float:
    """Drive power averaged over the last full period of a trajectory.

    Raises:
        DomainError: if the trajectory is shorter than one period
    """
    period = 2 * np.pi / p.v
    t = traj.t
    if t[-1] - t[0] < period * (1 - 1e-9):
        raise DomainError("stationary_power needs at least one full period")
    mask = t >= t[-1] - period - 0.5 * traj.grid.dt
    power = 0.5 * p.H * p.v * (np.sin(p.v * t) * traj.sz - np.cos(p.v * t) * traj.sx)
    return float(trapezoid(power[mask], t[mask]) / (t[mask][-1] - t[mask][0]))


def stationary_report(p: ModelParams, rates: GKLSRates) -> Dict[str, float]:
    w_flow, de_half, eta = stationary_energetics(p)
    return {
        "gamma_relax": rates.gamma_relax,
        "gamma_deph": rates.gamma_deph,
        "lamb_shift": rates.lamb_shift,
        "W_flow": w_flow,
        "dE_dyn_half": de_half,
        "eta_longtime": eta,
    }
