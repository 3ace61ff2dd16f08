"""Exact propagation of the spin coupled to a few truncated bosonic modes.

The joint state lives in C^2 x C^(N_0+1) x ... x C^(N_{K-1}+1), stored as a
flat vector with the spin index slowest, then mode 0, mode 1, ... The
Hamiltonian

    H(t) = -(H/2)(cos vt sz + sin vt sx) - (M/2) sz + (sz/2) sum_k g_k (b_k + b_k^+)
           + sum_k w_k b_k^+ b_k

is applied matrix-free, one ladder-operator slice per mode.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from quantum_dynamo.exceptions import ArgumentError, IntegrationError, PreparationError
from quantum_dynamo.model.field import induced_field_from_sz
from quantum_dynamo.model.params import ModelParams, ModeSet, Preparation, TimeGrid
from quantum_dynamo.model.series import FieldTrajectory, SpinTrajectory
from quantum_dynamo.settings import settings
from quantum_dynamo.solvers.stepping import sample_on_grid

logger = logging.getLogger(__name__)

_SZ = np.array([1.0, -1.0])


def required_levels(ms: ModeSet) -> List[int]:
    """Smallest N_k holding the displaced vacuum: 25 (g_k / 2 w_k)^2 + 10."""
    nbar = (ms.gs / (2 * ms.omegas)) ** 2
    return [int(np.ceil(25 * x + 10)) for x in nbar]


class FockTruncation(BaseModel):
    """Maximum occupation N_k kept for each mode."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    levels: Tuple[int, ...]

    @field_validator("levels")
    @classmethod
    def _positive(cls, levels: Tuple[int, ...]) -> Tuple[int, ...]:
        if not levels or any(n < 1 for n in levels):
            raise ValueError("every mode needs a truncation N_k >= 1")
        return levels

    @classmethod
    def uniform(cls, n_max: int, n_modes: int) -> "FockTruncation":
        return cls(levels=(n_max,) * n_modes)

    @classmethod
    def for_modes(cls, ms: ModeSet) -> "FockTruncation":
        return cls(levels=tuple(required_levels(ms)))

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(n + 1 for n in self.levels)


@dataclass
class JointState:
    """Spin-boson state vector together with its tensor shape."""

    amplitudes: np.ndarray
    shape: Tuple[int, ...]
    flags: Tuple[str, ...] = ()

    @property
    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.shape)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass
class BathRecord:
    """Per-time, per-mode bath moments.

    Attributes:
        b: <b_k> (complex), shape (n_points, n_modes)
        n: <b_k^+ b_k>
        n2: <(b_k^+ b_k)^2>, used by the occupation audit
        s_r: Re<S (b_k + b_k^+)> with S = sz/2
        s_mean: <S>
    """

    grid: TimeGrid
    b: np.ndarray
    n: np.ndarray
    n2: np.ndarray
    s_r: np.ndarray
    s_mean: np.ndarray
    levels: Tuple[int, ...]
    flags: Tuple[str, ...] = ()
    metadata: Dict[str, float] = field(default_factory=dict)

    # S^2 = 1/4 identically for a spin 1/2
    s2: float = 0.25

    @property
    def t(self) -> np.ndarray:
        return self.grid.times

    @property
    def n_std(self) -> np.ndarray:
        return np.sqrt(np.clip(self.n2 - self.n**2, 0.0, None))

    def occupation_bound(self) -> np.ndarray:
        """max_t (<n_k> + 4 std n_k) per mode."""
        return np.max(self.n + 4 * self.n_std, axis=0)

    @property
    def valid(self) -> bool:
        return "truncation_exceeded" not in self.flags


def _coherent_amplitudes(beta: float, n_max: int) -> np.ndarray:
    ratios = np.concatenate([[1.0], beta / np.sqrt(np.arange(1, n_max + 1))])
    coeffs = np.cumprod(ratios) * np.exp(-0.5 * beta**2)
    return coeffs / np.linalg.norm(coeffs)


def prepare_state(
    p: ModelParams,
    ms: ModeSet,
    tr: FockTruncation,
    strict: bool = True,
) -> JointState:
    """Initial spin-up state with the bath in vacuum (P2) or displaced (P1).

    P1 displaces each mode to <b_k> = -g_k/(2 w_k), the bath ground state for
    the up spin, so h_k(0) = -g_k^2/w_k.

    Args:
        p: Model parameters (only the preparation is used)
        ms: Bath modes
        tr: Fock truncation, one level per mode
        strict: Enforce N_k >= 25 (g_k/2w_k)^2 + 10 for P1; otherwise only warn

    Raises:
        PreparationError: if a truncation is too small in strict mode
    """
    if len(tr.levels) != len(ms):
        raise ArgumentError(f"{len(tr.levels)} truncations for {len(ms)} modes")
    flags: Tuple[str, ...] = ()
    if p.preparation is Preparation.P1:
        needed = required_levels(ms)
        short = [k for k, (n, r) in enumerate(zip(tr.levels, needed)) if n < r]
        if short:
            message = f"truncation too small for modes {short}: need N_k >= {needed}"
            if strict:
                raise PreparationError(message, required=needed)
            logger.warning(message)
            flags = ("truncation_below_rule",)

    state = np.array([1.0 + 0j, 0.0])
    for mode, n_max in zip(ms.modes, tr.levels):
        if p.preparation is Preparation.P1:
            local = _coherent_amplitudes(-mode.g / (2 * mode.omega), n_max)
        else:
            local = np.zeros(n_max + 1)
            local[0] = 1.0
        state = np.multiply.outer(state, local.astype(complex))
    return JointState(amplitudes=state.ravel(), shape=state.shape, flags=flags)


class _LadderAction:
    """Matrix-free ladder operators on the joint tensor."""

    def __init__(self, shape: Tuple[int, ...]):
        self.shape = shape
        self.ndim = len(shape)
        self.sz = _SZ.reshape((2,) + (1,) * (self.ndim - 1))
        self.number: List[np.ndarray] = []
        self.sqrt: List[np.ndarray] = []
        self.lower: List[tuple] = []
        self.upper: List[tuple] = []
        for axis in range(1, self.ndim):
            d = shape[axis]
            bshape = [1] * self.ndim
            bshape[axis] = d
            self.number.append(np.arange(d, dtype=float).reshape(bshape))
            bshape[axis] = d - 1
            self.sqrt.append(np.sqrt(np.arange(1, d, dtype=float)).reshape(bshape))
            lo = [slice(None)] * self.ndim
            hi = [slice(None)] * self.ndim
            lo[axis] = slice(0, d - 1)
            hi[axis] = slice(1, d)
            self.lower.append(tuple(lo))
            self.upper.append(tuple(hi))

    def position(self, psi: np.ndarray, k: int) -> np.ndarray:
        """(b_k + b_k^+) psi."""
        out = np.zeros_like(psi)
        lo, hi, sq = self.lower[k], self.upper[k], self.sqrt[k]
        out[lo] += sq * psi[hi]
        out[hi] += sq * psi[lo]
        return out

    def lowering_expectation(self, psi: np.ndarray, k: int, weight=1.0) -> complex:
        """<psi| weight b_k |psi> for a diagonal spin weight."""
        lo, hi, sq = self.lower[k], self.upper[k], self.sqrt[k]
        return complex(np.sum(np.conj(psi[lo]) * weight * sq * psi[hi]))


class _JointHamiltonian:
    def __init__(self, p: ModelParams, ms: ModeSet, shape: Tuple[int, ...]):
        self.p = p
        self.ms = ms
        self.ladder = _LadderAction(shape)
        self.shape = shape
        self.bath_energy = sum(w * n for w, n in zip(ms.omegas, self.ladder.number))

    def apply(self, t: float, psi: np.ndarray) -> np.ndarray:
        p, lad = self.p, self.ladder
        bz = -0.5 * (p.H * np.cos(p.v * t) + p.M)
        bx = -0.5 * p.H * np.sin(p.v * t)
        coupling = np.zeros_like(psi)
        for k, g in enumerate(self.ms.gs):
            if g != 0:
                coupling += g * lad.position(psi, k)
        out = bz * lad.sz * psi + bx * psi[::-1] + 0.5 * lad.sz * coupling
        return out + self.bath_energy * psi

    def power(self, t: float, psi: np.ndarray) -> float:
        """<dH/dt> = (Hv/2)(sin vt <sz> - cos vt <sx>)."""
        p = self.p
        prob = np.abs(psi) ** 2
        sz = prob[0].sum() - prob[1].sum()
        sx = 2 * np.real(np.vdot(psi[0], psi[1]))
        return 0.5 * p.H * p.v * (np.sin(p.v * t) * sz - np.cos(p.v * t) * sx)

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        psi = y[:-1].reshape(self.shape)
        out = np.empty_like(y)
        out[:-1] = -1j * self.apply(t, psi).ravel()
        out[-1] = self.power(t, psi)
        return out

    def observe(self, t: float, y: np.ndarray) -> dict:
        psi = y[:-1].reshape(self.shape)
        lad = self.ladder
        prob = np.abs(psi) ** 2
        norm2 = prob.sum()
        rho_ud = np.vdot(psi[1], psi[0]) / norm2
        obs = {
            "sx": 2 * rho_ud.real,
            "sy": -2 * rho_ud.imag,
            "sz": (prob[0].sum() - prob[1].sum()) / norm2,
            "norm": np.sqrt(norm2),
            "work": y[-1].real,
        }
        n_modes = len(self.ms)
        b = np.empty(n_modes, dtype=complex)
        n = np.empty(n_modes)
        n2 = np.empty(n_modes)
        s_r = np.empty(n_modes)
        for k in range(n_modes):
            b[k] = lad.lowering_expectation(psi, k) / norm2
            # Re<S(b + b^+)> = Re<sz b> for S = sz/2
            s_r[k] = lad.lowering_expectation(psi, k, lad.sz).real / norm2
            n[k] = np.sum(prob * lad.number[k]) / norm2
            n2[k] = np.sum(prob * lad.number[k] ** 2) / norm2
        obs.update(b=b, n=n, n2=n2, s_r=s_r)
        return obs


def propagate(
    state0: JointState,
    p: ModelParams,
    ms: ModeSet,
    grid: TimeGrid,
    tol: Optional[float] = None,
) -> Tuple[SpinTrajectory, BathRecord]:
    """Solve i d|psi>/dt = H(t)|psi> and record spin and bath observables on the grid.

    The drive work int <dH/dt> dt is integrated alongside the state.

    Args:
        state0: Initial joint state
        p: Model parameters
        ms: Bath modes (must match the state's shape)
        grid: Output grid; t0 is the preparation time
        tol: Local error target (defaults to settings.tol)

    Returns:
        (SpinTrajectory, BathRecord)

    Raises:
        IntegrationError: on non-finite amplitudes
    """
    tol = settings.tol if tol is None else tol
    if len(state0.shape) - 1 != len(ms):
        raise ArgumentError("state shape does not match the mode set")
    ham = _JointHamiltonian(p, ms, state0.shape)
    y0 = np.concatenate([state0.amplitudes.astype(complex), [0j]])
    logger.info(
        "ED propagation: %d modes, dimension %d, %d grid points",
        len(ms),
        state0.amplitudes.size,
        grid.n_points,
    )
    samples, n_steps = sample_on_grid(ham.rhs, y0, grid.times, ham.observe, rtol=tol, atol=tol)

    def stack(key: str) -> np.ndarray:
        return np.array([s[key] for s in samples])

    norm = stack("norm")
    if not np.all(np.isfinite(norm)):
        raise IntegrationError("non-finite amplitudes in ED propagation")

    flags = list(state0.flags)
    drift = float(np.max(np.abs(norm - 1)))
    if drift > 10 * tol * max(grid.n_steps, n_steps):
        flags.append("norm_drift")
        logger.warning("norm drift %.3g exceeds tolerance", drift)

    levels = tuple(d - 1 for d in state0.shape[1:])
    record = BathRecord(
        grid=grid,
        b=stack("b"),
        n=stack("n"),
        n2=stack("n2"),
        s_r=stack("s_r"),
        s_mean=stack("sz") / 2,
        levels=levels,
        metadata={"norm_drift": drift, "n_steps": n_steps},
    )
    bound = record.occupation_bound()
    if np.any(bound >= np.array(levels)):
        flags.append("truncation_exceeded")
        logger.warning("occupation audit failed: <n>+4sd = %s vs N = %s", bound, levels)
    record.flags = tuple(flags)

    sy = stack("sy")
    traj = SpinTrajectory(
        grid=grid,
        sx=stack("sx"),
        sy=sy,
        sz=stack("sz"),
        sz_dot=-p.H * np.sin(p.v * grid.times) * sy,
        w_dr=stack("work"),
        flags=tuple(flags),
        metadata={"solver": "ed", "n_steps": n_steps, "norm_drift": drift},
    )
    return traj, record


def measure_field(rec: BathRecord, ms: ModeSet) -> FieldTrajectory:
    """h(t) = <R(t)> = sum_k 2 g_k Re<b_k(t)>, with the per-mode split."""
    per_mode = 2 * ms.gs * rec.b.real
    return FieldTrajectory(
        grid=rec.grid,
        h_total=per_mode.sum(axis=1),
        per_mode=per_mode,
        flags=rec.flags,
        metadata={"source": "measured"},
    )


@dataclass
class EDResult:
    """Everything produced by one exact-diagonalization run."""

    trajectory: SpinTrajectory
    record: BathRecord
    measured: FieldTrajectory
    reconstructed: FieldTrajectory
    modes: ModeSet

    @property
    def reconstruction_error(self) -> float:
        return float(np.max(np.abs(self.measured.h_total - self.reconstructed.h_total)))


def run_ed(
    p: ModelParams,
    ms: ModeSet,
    grid: TimeGrid,
    truncation: Optional[FockTruncation] = None,
    tol: Optional[float] = None,
    strict: bool = True,
) -> EDResult:
    """Prepare, propagate and measure; also reconstruct h(t) from <sigma^z> alone."""
    truncation = truncation or FockTruncation.for_modes(ms)
    state0 = prepare_state(p, ms, truncation, strict=strict)
    traj, record = propagate(state0, p, ms, grid, tol)
    measured = measure_field(record, ms)
    reconstructed = induced_field_from_sz(traj, ms, p.preparation)
    return EDResult(traj, record, measured, reconstructed, ms)
