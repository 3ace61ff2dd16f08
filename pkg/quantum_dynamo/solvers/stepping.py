"""Adaptive Runge-Kutta propagation sampled on a fixed output grid."""

import logging
from typing import Callable, List, Tuple, TypeVar

import numpy as np
from scipy.integrate import DOP853

from quantum_dynamo.exceptions import IntegrationError

logger = logging.getLogger(__name__)

T = TypeVar("T")


def sample_on_grid(
    fun: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    times: np.ndarray,
    observe: Callable[[float, np.ndarray], T],
    rtol: float,
    atol: float,
) -> Tuple[List[T], int]:
    """Integrate y' = fun(t, y) with DOP853 and call ``observe`` on every grid time.

    Only the current step and its dense-output interpolant are kept in memory,
    so long grids over large state vectors stay cheap.

    Returns:
        (observations, number of accepted steps)

    Raises:
        IntegrationError: when the stepper fails or the state becomes non-finite
    """
    out = [observe(float(times[0]), y0)]
    if len(times) == 1:
        return out, 0
    solver = DOP853(fun, float(times[0]), y0, float(times[-1]), rtol=rtol, atol=atol)
    idx = 1
    n_steps = 0
    while idx < len(times):
        message = solver.step()
        n_steps += 1
        if solver.status == "failed":
            raise IntegrationError(f"adaptive step failed at t={solver.t:.6g}: {message}")
        if not np.all(np.isfinite(solver.y)):
            raise IntegrationError(f"non-finite state at t={solver.t:.6g}")
        interp = solver.dense_output()
        while idx < len(times) and (times[idx] <= solver.t or solver.status == "finished"):
            t = float(times[idx])
            y = solver.y if t >= solver.t else interp(t)
            out.append(observe(t, y))
            idx += 1
    logger.debug("DOP853 finished: %d steps, %d rhs evaluations", n_steps, solver.nfev)
    return out, n_steps
