"""Non-interacting blip approximation for the driven Ohmic spin.

<sigma^z> obeys the Volterra equation

    d<sigma^z>/dt = int_0^t [K-(t, t') - K+(t, t') <sigma^z(t')>] dt'

and <sigma^x> follows by quadrature against Y+ and Y-. With
zeta(t, t') = int_{t'}^t (H cos vt'' + M) dt'' and Delta(t) = H sin(vt):

    K+ = Delta(t) Delta(t') e^{-Q2} cos Q1 cos zeta
    K- = Delta(t) Delta(t') e^{-Q2} sin Q1 sin zeta
    Y+ = Delta(t') e^{-Q2} sin Q1 cos zeta
    Y- = Delta(t') e^{-Q2} cos Q1 sin zeta

with Q1, Q2 evaluated at t - t'.
"""

import logging
from typing import Tuple

import numpy as np

from quantum_dynamo.exceptions import ArgumentError
from quantum_dynamo.model.bath import BathCorrelation
from quantum_dynamo.model.params import ModelParams, TimeGrid
from quantum_dynamo.model.series import SpinTrajectory

logger = logging.getLogger(__name__)

RECOMMENDED_DT_H = 0.05
# |sin vt| below this counts as a node of the tunneling element
NODE_TOL = 1e-9
LIMIT_TOL = 1e-6
BLOCH_SLACK = 0.02


class NIBAKernels:
    """Kernel rows K+, K-, Y+, Y- on the lower triangle t' <= t of a grid.

    Rows are built on demand; :meth:`table` materializes the full triangle for
    small grids.
    """

    def __init__(self, p: ModelParams, grid: TimeGrid, use_Q1_plateau: bool = False):
        self.p = p
        self.grid = grid
        self.times = grid.times
        self.corr = BathCorrelation.from_params(p, use_Q1_plateau=use_Q1_plateau)
        self.delta = p.H * np.sin(p.v * self.times)
        self._drive_phase = (p.H / p.v) * np.sin(p.v * self.times) + p.M * self.times

    def zeta(self, i: int) -> np.ndarray:
        """zeta(t_i, t_j) for j = 0..i in closed form."""
        return self._drive_phase[i] - self._drive_phase[: i + 1]

    def row(self, i: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(K+, K-, Y+, Y-) at t = t_i for t' = t_0..t_i."""
        lag = self.times[i] - self.times[: i + 1]
        damp = np.exp(-self.corr.Q2(lag))
        q1 = self.corr.Q1(lag)
        z = self.zeta(i)
        cq, sq = np.cos(q1), np.sin(q1)
        cz, sz = np.cos(z), np.sin(z)
        base = self.delta[: i + 1] * damp
        return (
            self.delta[i] * base * cq * cz,
            self.delta[i] * base * sq * sz,
            base * sq * cz,
            base * cq * sz,
        )

    def table(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Full lower-triangular tables, shape (n, n), zero above the diagonal."""
        n = self.grid.n_points
        out = [np.zeros((n, n)) for _ in range(4)]
        for i in range(n):
            for table, values in zip(out, self.row(i)):
                table[i, : i + 1] = values
        return tuple(out)


def _trapezoid_weights(n: int, dt: float) -> np.ndarray:
    w = np.full(n, dt)
    w[0] = w[-1] = dt / 2
    if n == 1:
        w[0] = 0.0
    return w


def solve_niba(p: ModelParams, grid: TimeGrid, use_Q1_plateau: bool = False) -> SpinTrajectory:
    """March the NIBA equations on a uniform grid starting from spin up.

    The history integral uses the full trapezoid rule. The diagonal term of
    each new step is treated implicitly, which makes the trapezoid update for
    <sigma^z> a scalar linear solve. <sigma^y> = -d<sigma^z>/dt / Delta(t);
    at nodes of Delta it takes the limit -d^2<sigma^z>/dt^2 / (H v cos vt)
    when d<sigma^z>/dt vanishes there and is NaN otherwise.

    The ``validity`` column is 1 where the bias |H cos vt + M| dominates the
    tunneling element and |sz| stays within the Bloch ball.

    With ``use_Q1_plateau`` the phase correlation Q1 is replaced by its
    long-time value pi^2 alpha; by default the exact arctan form is used.
    """
    dt = grid.dt
    if dt * p.H > RECOMMENDED_DT_H:
        logger.warning("NIBA step dt*H = %.3g exceeds the recommended %.3g", dt * p.H, RECOMMENDED_DT_H)
    if p.alpha >= 1:
        raise ArgumentError("the NIBA kernels need alpha < 1")

    kernels = NIBAKernels(p, grid, use_Q1_plateau)
    n = grid.n_points
    sz = np.empty(n)
    sz_dot = np.empty(n)
    sx = np.empty(n)
    sz[0], sz_dot[0], sx[0] = 1.0, 0.0, 0.0

    for i in range(1, n):
        k_plus, k_minus, y_plus, y_minus = kernels.row(i)
        w = _trapezoid_weights(i + 1, dt)
        known = np.dot(w, k_minus) - np.dot(w[:-1] * k_plus[:-1], sz[:i])
        diag = w[-1] * k_plus[-1]
        sz[i] = (sz[i - 1] + 0.5 * dt * (sz_dot[i - 1] + known)) / (1 + 0.5 * dt * diag)
        sz_dot[i] = known - diag * sz[i]
        sx[i] = np.dot(w, y_plus + y_minus * sz[: i + 1])
        if i % 1000 == 0:
            logger.debug("NIBA step %d/%d", i, n - 1)

    t = grid.times
    delta = p.H * np.sin(p.v * t)
    sy = np.full(n, np.nan)
    regular = np.abs(np.sin(p.v * t)) > NODE_TOL
    sy[regular] = -sz_dot[regular] / delta[regular]
    sz_ddot = np.gradient(sz_dot, dt) if n > 1 else np.zeros(n)
    node = ~regular & (np.abs(sz_dot) <= LIMIT_TOL)
    sy[node] = -sz_ddot[node] / (p.H * p.v * np.cos(p.v * t[node]))
    sy[0] = 0.0
    undefined = int(np.sum(~regular & ~node))
    if undefined:
        logger.info("NIBA: %d samples of sy undefined at nodes of Delta(t)", undefined)

    bias = np.abs(p.H * np.cos(p.v * t) + p.M)
    validity = ((bias >= np.abs(delta)) & (np.abs(sz) <= 1 + BLOCH_SLACK)).astype(float)
    flags = ("sy_undefined",) if undefined else ()
    return SpinTrajectory(
        grid=grid,
        sx=sx,
        sy=sy,
        sz=sz,
        sz_dot=sz_dot,
        flags=flags,
        metadata={"solver": "niba", "use_Q1_plateau": use_Q1_plateau},
        extra_columns={"validity": validity},
    )
