"""Stochastic Schrodinger equation for the continuous Ohmic bath.

The influence of a zero-temperature Ohmic bath (alpha < 1/2) is carried by a
Gaussian field h_s(t) whose correlations reproduce Q2(t - s)/pi up to a
constant. For each field realization the four double-path amplitudes Phi obey
the linear equation i dPhi/dt = V(t) Phi, and the reduced density matrix is
the trajectory average of

    rho_11 = Phi_1, rho_12 = e^{-h} Phi_2, rho_21 = e^{h} Phi_3, rho_22 = Phi_4

with h(t) = h_s(t) - i int_0^t (H cos vt' + M) dt'.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.fft import dct
from tqdm import tqdm

from quantum_dynamo.exceptions import (
    ArgumentError,
    DomainError,
    FieldConstructionError,
    IntegrationError,
)
from quantum_dynamo.model.bath import BathCorrelation
from quantum_dynamo.model.params import ModelParams, TimeGrid
from quantum_dynamo.model.series import SpinTrajectory
from quantum_dynamo.settings import settings
from quantum_dynamo.solvers.stepping import sample_on_grid

logger = logging.getLogger(__name__)

# Coefficients of the wrong sign below this fraction of max|g_m| are numerical noise.
CLIP_FRACTION = 1e-12
# Wrong-sign weight above this fraction of sum|g_m| signals a bad (M, t_f) pair.
WRONG_SIGN_LIMIT = 1e-2
# Trajectory amplitudes beyond this magnitude count as overflowed.
OVERFLOW_BOUND = 1e12
DEGRADED_FRACTION = 0.01
DEFAULT_SSE_TOL = 1e-7


def fourier_coefficients(corr: BathCorrelation, t_f: float, M: int) -> np.ndarray:
    """Cosine-series coefficients g_0..g_M of Q2(tau t_f)/pi on tau in [-1, 1].

    Computed with a type-I DCT on M + 1 nodes of [0, 1] (the 2M-point even
    extension). The last coefficient is halved so that
    g_0/2 + sum_{m>=1} g_m cos(m pi tau) interpolates the nodes exactly.

    Raises:
        ArgumentError: if t_f <= 0 or M < 1
    """
    if t_f <= 0:
        raise ArgumentError(f"t_f must be positive, got {t_f}")
    if M < 1:
        raise ArgumentError("at least one Fourier mode is required")
    if M & (M - 1):
        logger.debug("M=%d is not a power of two; using the general DCT path", M)
    nodes = np.linspace(0.0, t_f, M + 1)
    values = corr.Q2(nodes) / np.pi
    g = dct(values, type=1) / M
    g[-1] *= 0.5
    return g


def reconstruct_q2(g: np.ndarray, tau: np.ndarray) -> np.ndarray:
    """Evaluate g_0/2 + sum_m g_m cos(m pi tau)."""
    m = np.arange(1, g.size)
    return g[0] / 2 + np.cos(np.pi * np.multiply.outer(np.asarray(tau), m)) @ g[1:]


def field_amplitudes(g: np.ndarray) -> np.ndarray:
    """Complex amplitudes sqrt(g_m), m >= 1, of the stochastic field.

    For the Ohmic Q2 the coefficients with m >= 1 are non-positive, so the
    field is imaginary; tiny positive values are clipped.

    Raises:
        FieldConstructionError: if positive coefficients carry significant weight
    """
    gm = np.array(g[1:], dtype=float)
    scale = np.max(np.abs(gm)) if gm.size else 0.0
    if scale == 0.0:
        return np.zeros(gm.size, dtype=complex)
    noise = (gm > 0) & (gm <= CLIP_FRACTION * scale)
    gm[noise] = 0.0
    wrong = gm[gm > 0].sum() / np.abs(gm).sum()
    if wrong > WRONG_SIGN_LIMIT:
        raise FieldConstructionError(
            f"{wrong:.2%} of the coefficient weight has the wrong sign; increase M or t_f"
        )
    return np.sqrt(gm.astype(complex))


@dataclass
class StochasticField:
    """One realization of h_s, evaluable at any time in [t0, t0 + t_f]."""

    amplitudes: np.ndarray
    s1: np.ndarray
    s2: np.ndarray
    t_f: float
    t0: float
    seed: int
    values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def n_modes(self) -> int:
        return self.amplitudes.size

    def __call__(self, t) -> np.ndarray:
        phase = np.pi * np.multiply.outer((np.asarray(t) - self.t0) / self.t_f, np.arange(1, self.n_modes + 1))
        return np.cos(phase) @ (self.amplitudes * self.s1) - np.sin(phase) @ (self.amplitudes * self.s2)


def sample_field(
    coeffs: np.ndarray,
    grid: TimeGrid,
    seed: int,
    t_f: Optional[float] = None,
) -> StochasticField:
    """Draw one field realization; bitwise reproducible for a given seed."""
    t_f = grid.tf - grid.t0 if t_f is None else t_f
    amps = field_amplitudes(coeffs)
    rng = np.random.default_rng(seed)
    s1 = rng.standard_normal(amps.size)
    s2 = rng.standard_normal(amps.size)
    realization = StochasticField(amps, s1, s2, t_f, grid.t0, seed)
    realization.values = realization(grid.times)
    return realization


class _BatchGenerator:
    """V(t) acting on a batch of trajectories sharing one time axis."""

    def __init__(self, p: ModelParams, amps: np.ndarray, s1: np.ndarray, s2: np.ndarray, t_f: float, t0: float):
        self.p = p
        self.t_f = t_f
        self.t0 = t0
        self.a1 = s1 * amps
        self.a2 = s2 * amps
        self.m = np.arange(1, amps.size + 1)
        self.u = np.exp(1j * np.pi * p.alpha)
        self.batch = s1.shape[0]

    def h(self, t: float) -> np.ndarray:
        p = self.p
        phase = np.pi * self.m * (t - self.t0) / self.t_f
        h_s = self.a1 @ np.cos(phase) - self.a2 @ np.sin(phase)
        drive = (p.H / p.v) * (np.sin(p.v * t) - np.sin(p.v * self.t0)) + p.M * (t - self.t0)
        return h_s - 1j * drive

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        phi = y.reshape(self.batch, 4)
        h = self.h(t)
        ep, em = np.exp(h), np.exp(-h)
        u, uc = self.u, np.conj(self.u)
        half_delta = 0.5 * self.p.H * np.sin(self.p.v * t)
        v_phi = np.empty_like(phi)
        v_phi[:, 0] = em * phi[:, 1] - ep * phi[:, 2]
        v_phi[:, 1] = u * ep * phi[:, 0] - uc * ep * phi[:, 3]
        v_phi[:, 2] = -uc * em * phi[:, 0] + u * em * phi[:, 3]
        v_phi[:, 3] = -em * phi[:, 1] + ep * phi[:, 2]
        return (-1j * half_delta * v_phi).ravel()

    def observe(self, t: float, y: np.ndarray) -> np.ndarray:
        """Per-trajectory rho entries (rho11, rho12, rho21, rho22), shape (batch, 4)."""
        phi = y.reshape(self.batch, 4)
        h = self.h(t)
        return np.stack([phi[:, 0], np.exp(-h) * phi[:, 1], np.exp(h) * phi[:, 2], phi[:, 3]], axis=1)


def _integrate(gen: _BatchGenerator, times: np.ndarray, tol: float) -> np.ndarray:
    y0 = np.zeros((gen.batch, 4), dtype=complex)
    y0[:, 0] = 1.0
    samples, _ = sample_on_grid(gen.rhs, y0.ravel(), times, gen.observe, rtol=tol, atol=tol)
    return np.array(samples)


def run_trajectory(
    p: ModelParams, realization: StochasticField, grid: TimeGrid, tol: float = DEFAULT_SSE_TOL
) -> np.ndarray:
    """Integrate one trajectory from Phi = (1, 0, 0, 0).

    Returns:
        Per-time rho entries (rho11, rho12, rho21, rho22), shape (n_points, 4)

    Raises:
        IntegrationError: if the amplitudes overflow
    """
    gen = _BatchGenerator(
        p, realization.amplitudes, realization.s1[None, :], realization.s2[None, :], realization.t_f, realization.t0
    )
    rho = _integrate(gen, grid.times, tol)[:, 0, :]
    if not np.all(np.isfinite(rho)) or np.max(np.abs(rho)) > OVERFLOW_BOUND:
        raise IntegrationError(f"trajectory with seed {realization.seed} overflowed")
    return rho


def rho_to_bloch(rho: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(sx, sy, sz) from rho entries along the last axis."""
    r11, r12, r21, r22 = (rho[..., i] for i in range(4))
    sx = np.real(r12 + r21)
    sy = np.real(1j * (r12 - r21))
    sz = np.real(r11 - r22)
    return sx, sy, sz


@dataclass
class _BatchSums:
    n_valid: int
    n_flagged: int
    rho_sum: np.ndarray
    rho_sq: np.ndarray
    bloch_sum: np.ndarray
    bloch_sq: np.ndarray


def _run_batch(task: Dict[str, Any]) -> _BatchSums:
    p: ModelParams = task["params"]
    seeds: List[int] = task["seeds"]
    amps: np.ndarray = task["amplitudes"]
    times: np.ndarray = task["times"]
    s1 = np.empty((len(seeds), amps.size))
    s2 = np.empty((len(seeds), amps.size))
    # same draw order as sample_field
    for i, s in enumerate(seeds):
        rng = np.random.default_rng(s)
        s1[i] = rng.standard_normal(amps.size)
        s2[i] = rng.standard_normal(amps.size)

    gen = _BatchGenerator(p, amps, s1, s2, task["t_f"], times[0])
    try:
        rho = _integrate(gen, times, task["tol"])
    except IntegrationError:
        logger.warning("batch starting at seed %d failed; integrating trajectories one by one", seeds[0])
        rows = []
        for i in range(len(seeds)):
            single = _BatchGenerator(p, amps, s1[i : i + 1], s2[i : i + 1], task["t_f"], times[0])
            try:
                rows.append(_integrate(single, times, task["tol"])[:, 0, :])
            except IntegrationError:
                rows.append(np.full((times.size, 4), np.nan, dtype=complex))
        rho = np.stack(rows, axis=1)

    good = np.all(np.isfinite(rho), axis=(0, 2)) & (np.nanmax(np.abs(rho), axis=(0, 2)) <= OVERFLOW_BOUND)
    rho = rho[:, good, :]
    bloch = np.stack(rho_to_bloch(rho), axis=-1)
    return _BatchSums(
        n_valid=int(good.sum()),
        n_flagged=int((~good).sum()),
        rho_sum=rho.sum(axis=1),
        rho_sq=(np.abs(rho) ** 2).sum(axis=1),
        bloch_sum=bloch.sum(axis=1),
        bloch_sq=(bloch**2).sum(axis=1),
    )


@dataclass
class SSEResult:
    """Trajectory-averaged spin dynamics with standard errors."""

    trajectory: SpinTrajectory
    se_sx: np.ndarray
    se_sy: np.ndarray
    se_sz: np.ndarray
    rho: np.ndarray
    rho_se: np.ndarray
    n_traj: int
    n_valid: int
    n_flagged: int
    seed0: int
    l1: float
    flags: Tuple[str, ...] = ()

    @property
    def degraded(self) -> bool:
        return "degraded" in self.flags

    def to_frame(self):
        frame = self.trajectory.to_frame()
        frame["se_sx"] = self.se_sx
        frame["se_sy"] = self.se_sy
        frame["se_sz"] = self.se_sz
        return frame


def _standard_error(total: np.ndarray, total_sq: np.ndarray, n: int) -> np.ndarray:
    if n < 2:
        return np.zeros_like(np.real(total))
    mean = total / n
    var = np.clip(total_sq / n - np.abs(mean) ** 2, 0.0, None) * n / (n - 1)
    return np.sqrt(var / n)


def average(
    p: ModelParams,
    grid: TimeGrid,
    n_traj: int,
    seed0: int = 0,
    fourier_modes: int = 512,
    t_f: Optional[float] = None,
    tol: float = DEFAULT_SSE_TOL,
    batch_size: Optional[int] = None,
    workers: Optional[int] = None,
    progress: bool = False,
) -> SSEResult:
    """Average n_traj trajectories with seeds seed0 .. seed0 + n_traj - 1.

    Batches have a fixed size and are reduced in seed order, so the result does
    not depend on the number of workers.

    Args:
        p: Model parameters (alpha < 1/2)
        grid: Output grid
        n_traj: Number of trajectories
        seed0: First seed
        fourier_modes: Number M of field Fourier modes
        t_f: Field period half-length (defaults to the grid span)
        tol: Integrator tolerance
        batch_size: Trajectories per batch (defaults to settings.sse_batch)
        workers: Worker processes (defaults to settings.workers)
        progress: Show a progress bar

    Returns:
        SSEResult: means, standard errors, and averaged rho entries
    """
    if n_traj < 1:
        raise ArgumentError("n_traj must be at least 1")
    if p.alpha >= 0.5:
        raise DomainError("the stochastic Schrodinger equation requires alpha < 1/2")
    t_f = grid.tf - grid.t0 if t_f is None else t_f
    batch_size = batch_size or settings.sse_batch
    workers = workers or settings.workers

    corr = BathCorrelation.from_params(p)
    coeffs = fourier_coefficients(corr, t_f, fourier_modes)
    amps = field_amplitudes(coeffs)
    times = grid.times
    tasks = [
        {
            "params": p,
            "seeds": list(range(start, min(start + batch_size, seed0 + n_traj))),
            "amplitudes": amps,
            "times": times,
            "t_f": t_f,
            "tol": tol,
        }
        for start in range(seed0, seed0 + n_traj, batch_size)
    ]
    logger.info("SSE: %d trajectories in %d batches, M=%d", n_traj, len(tasks), fourier_modes)

    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(tqdm(pool.map(_run_batch, tasks), total=len(tasks), disable=not progress, desc="sse"))
    else:
        results = [_run_batch(t) for t in tqdm(tasks, disable=not progress, desc="sse")]

    n_valid = sum(r.n_valid for r in results)
    n_flagged = sum(r.n_flagged for r in results)
    if n_valid == 0:
        raise IntegrationError("every SSE trajectory overflowed")
    rho_sum = sum(r.rho_sum for r in results)
    rho_sq = sum(r.rho_sq for r in results)
    bloch_sum = sum(r.bloch_sum for r in results)
    bloch_sq = sum(r.bloch_sq for r in results)

    flags: List[str] = []
    if n_flagged > DEGRADED_FRACTION * n_traj:
        flags.append("degraded")
        logger.warning("%d of %d SSE trajectories excluded", n_flagged, n_traj)

    mean = bloch_sum / n_valid
    se = _standard_error(bloch_sum, bloch_sq, n_valid)
    sy = mean[:, 1]
    traj = SpinTrajectory(
        grid=grid,
        sx=mean[:, 0],
        sy=sy,
        sz=mean[:, 2],
        sz_dot=-p.H * np.sin(p.v * times) * sy,
        flags=tuple(flags),
        metadata={"solver": "sse", "n_traj": n_traj, "seed0": seed0, "fourier_modes": fourier_modes},
    )
    return SSEResult(
        trajectory=traj,
        se_sx=se[:, 0],
        se_sy=se[:, 1],
        se_sz=se[:, 2],
        rho=rho_sum / n_valid,
        rho_se=_standard_error(rho_sum, rho_sq, n_valid),
        n_traj=n_traj,
        n_valid=n_valid,
        n_flagged=n_flagged,
        seed0=seed0,
        l1=float(-coeffs[0] / 2),
        flags=tuple(flags),
    )
