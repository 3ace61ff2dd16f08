"""Dynamics solvers: exact diagonalization, SSE, NIBA and GKLS."""

from .ed import BathRecord, EDResult, FockTruncation, JointState, measure_field, prepare_state, propagate, run_ed
from .gkls import DensityMatrix2, Frame, GKLSRates, build_rates, propagate_gkls, stationary_energetics, stationary_power
from .niba import NIBAKernels, solve_niba
from .sse import SSEResult, StochasticField, average, fourier_coefficients, run_trajectory, sample_field

__all__ = [
    "BathRecord",
    "DensityMatrix2",
    "EDResult",
    "FockTruncation",
    "Frame",
    "GKLSRates",
    "JointState",
    "NIBAKernels",
    "SSEResult",
    "StochasticField",
    "average",
    "build_rates",
    "fourier_coefficients",
    "measure_field",
    "prepare_state",
    "propagate",
    "propagate_gkls",
    "run_ed",
    "run_trajectory",
    "sample_field",
    "solve_niba",
    "stationary_energetics",
    "stationary_power",
]
