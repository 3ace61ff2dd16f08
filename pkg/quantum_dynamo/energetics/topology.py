"""Chern numbers of the spin ground-state bundle and their dynamical estimate."""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.integrate import trapezoid

from quantum_dynamo.energetics.ledger import EnergyLedger
from quantum_dynamo.exceptions import ArgumentError, DomainError
from quantum_dynamo.model.params import ModelParams
from quantum_dynamo.model.series import SpinTrajectory

logger = logging.getLogger(__name__)


class RelationMode(str, Enum):
    ONE_MODE = "one_mode"
    CONTINUUM = "continuum"


@dataclass(frozen=True)
class ChernNumbers:
    """Ground-state C, dynamical C_dyn and the integral cross-check of C_dyn."""

    C: int
    C_dyn: float
    C_dyn_integral: Optional[float] = None


def ground_state_chern(H: float, M: float) -> int:
    """(sz_gs(theta=0) - sz_gs(theta=pi)) / 2 for the field H(sin, 0, cos) + M z."""
    if abs(H) == abs(M):
        raise DomainError("the gap closes at a pole when |M| = H")
    return int(round((np.sign(H + M) - np.sign(M - H)) / 2))


def dynamical_chern(traj: SpinTrajectory, p: ModelParams) -> float:
    """C_dyn = [sz(0) - sz(pi/v)] / 2."""
    if traj.t[-1] < traj.grid.t0 + p.half_period * (1 - 1e-9):
        raise ArgumentError("trajectory does not reach t = pi/v")
    return 0.5 * (traj.sz[0] - traj.value_at(traj.grid.t0 + p.half_period))


def dynamical_chern_integral(traj: SpinTrajectory, p: ModelParams) -> float:
    """C_dyn = (H/2) int_0^{pi/v} sin(vt) <sigma^y> dt, from d<sigma^z>/dt = -H sin(vt) <sigma^y>."""
    t_end = traj.grid.t0 + p.half_period
    mask = traj.t <= t_end + 0.5 * traj.grid.dt
    t = traj.t[mask]
    integrand = np.sin(p.v * t) * traj.sy[mask]
    if np.any(~np.isfinite(integrand)):
        finite = np.isfinite(integrand)
        integrand = np.interp(t, t[finite], integrand[finite])
    return float(0.5 * p.H * trapezoid(integrand, t))


def chern_numbers(traj: SpinTrajectory, p: ModelParams) -> ChernNumbers:
    return ChernNumbers(
        C=ground_state_chern(p.H, p.M),
        C_dyn=float(dynamical_chern(traj, p)),
        C_dyn_integral=dynamical_chern_integral(traj, p),
    )


def berry_chern(H: float, M: float, n_theta: int = 64, n_phi: int = 64) -> int:
    """Chern number of the ground state of -(B . sigma)/2 by lattice Berry flux.

    B(theta, phi) = H (sin theta cos phi, sin theta sin phi, cos theta) + M z.
    Plaquette phases are gauge invariant, so eigenvector phases never matter.
    """
    if n_theta < 2 or n_phi < 3:
        raise ArgumentError("lattice too coarse")
    if abs(H) == abs(M):
        raise DomainError("the gap closes at a pole when |M| = H")
    theta = np.linspace(0.0, np.pi, n_theta + 1)
    phi = np.linspace(0.0, 2 * np.pi, n_phi, endpoint=False)
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    bx = H * np.sin(th) * np.cos(ph)
    by = H * np.sin(th) * np.sin(ph)
    bz = H * np.cos(th) + M
    ham = np.empty(th.shape + (2, 2), dtype=complex)
    ham[..., 0, 0] = -0.5 * bz
    ham[..., 1, 1] = 0.5 * bz
    ham[..., 0, 1] = -0.5 * (bx - 1j * by)
    ham[..., 1, 0] = -0.5 * (bx + 1j * by)
    _, vecs = np.linalg.eigh(ham)
    u = vecs[..., :, 0]

    def link(a, b):
        return np.sum(np.conj(a) * b, axis=-1)

    u00 = u[:-1, :]
    u10 = u[1:, :]
    u11 = np.roll(u[1:, :], -1, axis=1)
    u01 = np.roll(u[:-1, :], -1, axis=1)
    loop = link(u00, u10) * link(u10, u11) * link(u11, u01) * link(u01, u00)
    flux = np.angle(loop).sum()
    return int(round(flux / (2 * np.pi)))


def topology_energy_relation(
    ledger: EnergyLedger,
    p: ModelParams,
    mode: RelationMode,
    c_dyn: float,
    g: Optional[float] = None,
):
    """Predicted dE_dyn(pi/v) from C_dyn and its relative deviation from the ledger.

    one_mode: g^2 pi^2 C_dyn^2 / (16 v); continuum: alpha pi^2 v C_dyn^2 / 4.

    Returns:
        (predicted, measured, relative deviation or None when predicted is 0)
    """
    mode = RelationMode(mode)
    if mode is RelationMode.ONE_MODE:
        if g is None:
            raise ArgumentError("the one-mode relation needs the coupling g")
        predicted = g**2 * np.pi**2 * c_dyn**2 / (16 * p.v)
    else:
        predicted = p.alpha * np.pi**2 * p.v * c_dyn**2 / 4
    measured = ledger.at(ledger.grid.t0 + p.half_period, "E_dyn")
    deviation = None if predicted == 0 else abs(measured - predicted) / abs(predicted)
    return float(predicted), float(measured), deviation
