"""Energy bookkeeping for the driven spin and its bath.

With S = sigma^z/2 and R = sum_k g_k (b_k + b_k^+) the energies are

    E_S    = <H_S(t)>
    E_int  = <S R>
    E_R    = sum_k w_k <b_k^+ b_k>
    E_dis  = sum_k w_k |<b_k>|^2
    E_dyn  = sum_k w_k |<b_k> + (g_k/w_k) <S>|^2
    E_fluct = E_R + E_int - E_dyn + sum_k g_k^2/(4 w_k)

so that W_dr = dE_S + dE_dyn + dE_fluct holds exactly on exact dynamics.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import cumulative_trapezoid

from quantum_dynamo.exceptions import ArgumentError
from quantum_dynamo.model.params import ModelParams, ModeSet, TimeGrid
from quantum_dynamo.model.series import SpinTrajectory
from quantum_dynamo.solvers.ed import BathRecord

logger = logging.getLogger(__name__)

LEDGER_COLUMNS = [
    "t",
    "W_dr",
    "E_S",
    "E_dis",
    "E_dyn",
    "E_fluct",
    "E_fluct_bath",
    "E_fluct_int",
    "E_fluct_spin",
    "E_int",
    "Q_R",
    "W_R",
]
UNDEFINED_DENOMINATOR = 1e-12
FLUCT_TOL = 1e-10


def drive_power(traj: SpinTrajectory, p: ModelParams) -> np.ndarray:
    """<dH_S/dt> = (Hv/2)(sin vt <sigma^z> - cos vt <sigma^x>)."""
    t = traj.t
    return 0.5 * p.H * p.v * (np.sin(p.v * t) * traj.sz - np.cos(p.v * t) * traj.sx)


def work_drive(traj: SpinTrajectory, p: ModelParams) -> np.ndarray:
    """Cumulative drive work; uses the co-integrated series when available."""
    if len(traj) == 0:
        raise ArgumentError("empty trajectory")
    if traj.w_dr is not None:
        return traj.w_dr - traj.w_dr[0]
    return cumulative_trapezoid(drive_power(traj, p), traj.t, initial=0.0)


def spin_energy(traj: SpinTrajectory, p: ModelParams) -> np.ndarray:
    t = traj.t
    return -0.5 * p.H * (np.cos(p.v * t) * traj.sz + np.sin(p.v * t) * traj.sx) - 0.5 * p.M * traj.sz


def dis_energy(rec: BathRecord, ms: ModeSet) -> Tuple[np.ndarray, np.ndarray]:
    """E_dis = sum_k w_k |<b_k>|^2 and its flow-integral form -int dh/dt <S> dt.

    The flow form is offset to match E_dis at the first sample.
    """
    e_dis = np.abs(rec.b) ** 2 @ ms.omegas
    h = 2 * rec.b.real @ ms.gs
    h_dot = np.gradient(h, rec.grid.dt)
    flow = e_dis[0] - cumulative_trapezoid(h_dot * rec.s_mean, rec.t, initial=0.0)
    return e_dis, flow


def dynamo_energy_modes(rec: BathRecord, ms: ModeSet) -> np.ndarray:
    """sum_k w_k |<b_k> + (g_k/w_k) <S>|^2 from the bath moments."""
    shifted = rec.b + np.multiply.outer(rec.s_mean, ms.gs / ms.omegas)
    return np.abs(shifted) ** 2 @ ms.omegas


def dynamo_energy_continuum(traj: SpinTrajectory, p: ModelParams) -> np.ndarray:
    """(alpha pi / 2) int_0^t (d<sigma^z>/dt)^2 dt'."""
    sz_dot = traj.sz_derivative()
    return 0.5 * p.alpha * np.pi * cumulative_trapezoid(sz_dot**2, traj.t, initial=0.0)


def dynamo_energy(source, model) -> Tuple[np.ndarray, str]:
    """E_dyn from a BathRecord with its ModeSet, or from a trajectory with ModelParams.

    Returns:
        (series, form) with form "modes" or "continuum"
    """
    if isinstance(source, BathRecord) and isinstance(model, ModeSet):
        return dynamo_energy_modes(source, model), "modes"
    if isinstance(source, SpinTrajectory) and isinstance(model, ModelParams):
        return dynamo_energy_continuum(source, model), "continuum"
    raise ArgumentError("dynamo_energy takes (BathRecord, ModeSet) or (SpinTrajectory, ModelParams)")


def fluct_energy(rec: BathRecord, ms: ModeSet) -> Dict[str, np.ndarray]:
    """E_fluct and its bath, interaction and spin parts.

    bath = sum w_k (<n_k> - |<b_k>|^2)
    int  = sum g_k (<S(b_k + b_k^+)> - <S> 2 Re<b_k>)
    spin = sum (g_k^2/w_k) (1/4 - <S>^2)
    """
    bath = (rec.n - np.abs(rec.b) ** 2) @ ms.omegas
    inter = (rec.s_r - 2 * rec.b.real * rec.s_mean[:, None]) @ ms.gs
    spin = (rec.s2 - rec.s_mean**2) * np.sum(ms.gs**2 / ms.omegas)
    total = bath + inter + spin
    if np.min(total) < -FLUCT_TOL:
        logger.warning("negative fluctuation energy %.3g", np.min(total))
    return {"E_fluct": total, "E_fluct_bath": bath, "E_fluct_int": inter, "E_fluct_spin": spin}


def interaction_energy(rec: BathRecord, ms: ModeSet) -> np.ndarray:
    return rec.s_r @ ms.gs


def heat_work_split(rec: BathRecord, ms: ModeSet) -> Tuple[np.ndarray, np.ndarray]:
    """(Q_R, W_R) = -(d sum w (<n> - |<b>|^2), d sum w |<b>|^2)."""
    incoherent = (rec.n - np.abs(rec.b) ** 2) @ ms.omegas
    coherent = np.abs(rec.b) ** 2 @ ms.omegas
    return -(incoherent - incoherent[0]), -(coherent - coherent[0])


@dataclass
class EnergyLedger:
    """Energy time series on one grid.

    ``form`` tells whether E_dyn came from bath moments ("modes") or from the
    continuum integral ("continuum"); in the latter case the mode-resolved
    columns are NaN and E_fluct closes the balance.
    """

    grid: TimeGrid
    W_dr: np.ndarray
    E_S: np.ndarray
    E_dis: np.ndarray
    E_dyn: np.ndarray
    E_fluct: np.ndarray
    E_fluct_bath: np.ndarray
    E_fluct_int: np.ndarray
    E_fluct_spin: np.ndarray
    E_int: np.ndarray
    Q_R: np.ndarray
    W_R: np.ndarray
    form: str = "modes"
    flags: Tuple[str, ...] = ()
    metadata: Dict[str, float] = field(default_factory=dict)

    @property
    def t(self) -> np.ndarray:
        return self.grid.times

    def delta(self, name: str) -> np.ndarray:
        series = getattr(self, name)
        return series - series[0]

    def at(self, t: float, name: str, relative: bool = True) -> float:
        series = self.delta(name) if relative else getattr(self, name)
        return float(np.interp(t, self.t, series))

    def balance_residual(self) -> np.ndarray:
        """W_dr - dE_S - dE_dyn - dE_fluct."""
        return self.W_dr - self.delta("E_S") - self.delta("E_dyn") - self.delta("E_fluct")

    def to_frame(self) -> pd.DataFrame:
        data = {"t": self.t}
        for name in LEDGER_COLUMNS[1:]:
            data[name] = getattr(self, name)
        return pd.DataFrame(data, columns=LEDGER_COLUMNS)


def build_ledger(traj: SpinTrajectory, rec: BathRecord, ms: ModeSet, p: ModelParams) -> EnergyLedger:
    """Full ledger from an exact run with bath moments."""
    parts = fluct_energy(rec, ms)
    q_r, w_r = heat_work_split(rec, ms)
    e_dis, _ = dis_energy(rec, ms)
    ledger = EnergyLedger(
        grid=traj.grid,
        W_dr=work_drive(traj, p),
        E_S=spin_energy(traj, p),
        E_dis=e_dis,
        E_dyn=dynamo_energy_modes(rec, ms),
        E_int=interaction_energy(rec, ms),
        Q_R=q_r,
        W_R=w_r,
        form="modes",
        flags=traj.flags,
        **parts,
    )
    residual = np.max(np.abs(ledger.balance_residual()))
    ledger.metadata["balance_residual"] = float(residual)
    logger.debug("energy balance residual %.3g", residual)
    return ledger


def build_continuum_ledger(traj: SpinTrajectory, p: ModelParams) -> EnergyLedger:
    """Ledger for solvers without bath moments (SSE, NIBA, GKLS)."""
    w_dr = work_drive(traj, p)
    e_s = spin_energy(traj, p)
    e_dyn = dynamo_energy_continuum(traj, p)
    e_fluct = w_dr - (e_s - e_s[0]) - e_dyn
    empty = np.full(len(traj), np.nan)
    return EnergyLedger(
        grid=traj.grid,
        W_dr=w_dr,
        E_S=e_s,
        E_dis=empty,
        E_dyn=e_dyn,
        E_fluct=e_fluct,
        E_fluct_bath=empty.copy(),
        E_fluct_int=empty.copy(),
        E_fluct_spin=empty.copy(),
        E_int=empty.copy(),
        Q_R=empty.copy(),
        W_R=empty.copy(),
        form="continuum",
        flags=traj.flags,
    )


def _ratio(num: float, den: float) -> Optional[float]:
    if not np.isfinite(num) or not np.isfinite(den) or abs(den) <= UNDEFINED_DENOMINATOR:
        return None
    return float(num / den)


def efficiencies(ledger: EnergyLedger, p: ModelParams, t: Optional[float] = None) -> Dict[str, Optional[float]]:
    """eta = dE_dyn/W_dr, eta_M = dE_dyn/(W_dr - M) and eta_dis = dE_dis/W_dr at time t.

    Undefined values (denominator within 1e-12 of zero) are None.
    """
    t = ledger.t[-1] if t is None else t
    w = ledger.at(t, "W_dr", relative=False)
    de_dyn = ledger.at(t, "E_dyn")
    de_dis = ledger.at(t, "E_dis")
    return {
        "eta": _ratio(de_dyn, w),
        "eta_M": _ratio(de_dyn, w - p.M),
        "eta_dis": _ratio(de_dis, w),
    }


def efficiency_marks(ledger: EnergyLedger, p: ModelParams) -> Dict[str, Dict[str, Optional[float]]]:
    """Efficiencies at every multiple of the half period inside the ledger."""
    marks = {}
    n = 1
    while n * p.half_period <= ledger.t[-1] * (1 + 1e-12):
        marks[f"n={n}"] = efficiencies(ledger, p, n * p.half_period)
        n += 1
    return marks


def average_power(ledger: EnergyLedger, period: float, marks: Optional[Sequence[int]] = None) -> float:
    """Largest averaged output power dE_dyn(n T) / (n T) over the available periods."""
    if period <= 0:
        raise ArgumentError("period must be positive")
    span = ledger.t[-1] - ledger.t[0]
    n_max = int(np.floor(span / period * (1 + 1e-12)))
    if n_max < 1:
        raise ArgumentError("ledger shorter than one period")
    ns = list(marks) if marks is not None else list(range(1, n_max + 1))
    powers = [ledger.at(ledger.t[0] + n * period, "E_dyn") / (n * period) for n in ns]
    return float(max(powers))
