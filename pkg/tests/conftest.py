"""Shared fixtures for the quantum_dynamo test suite."""

import numpy as np
import pytest

from quantum_dynamo.model.params import ModelParams, ModeSet, TimeGrid
from quantum_dynamo.model.series import SpinTrajectory


@pytest.fixture
def slow_drive():
    """H = 1, v = 0.04 with an exponential cutoff at 100 and no coupling."""
    return ModelParams(H=1.0, v=0.04, alpha=0.0, omega_c=100.0)


@pytest.fixture
def weak_continuum():
    return ModelParams(H=1.0, v=0.04, alpha=0.01, omega_c=100.0)


@pytest.fixture
def resonant_mode():
    return ModeSet.single(omega=0.04, g=0.01)


@pytest.fixture
def half_period_grid():
    return TimeGrid.half_periods(v=0.04, n_half=1, steps_per_half=400)


def adiabatic_trajectory(v: float, grid: TimeGrid) -> SpinTrajectory:
    """Spin locked to the field direction: sx = sin vt, sy = 0, sz = cos vt."""
    t = grid.times
    return SpinTrajectory(
        grid=grid,
        sx=np.sin(v * t),
        sy=np.zeros_like(t),
        sz=np.cos(v * t),
        sz_dot=-v * np.sin(v * t),
    )


@pytest.fixture
def adiabatic_spin(half_period_grid):
    return adiabatic_trajectory(0.04, half_period_grid)


@pytest.fixture
def registry(tmp_path):
    """Run registry backed by a throwaway SQLite file."""
    from quantum_dynamo.db import RegistryConfig

    config = RegistryConfig(f"sqlite:///{tmp_path / 'runs.db'}")
    config.create_tables()
    return config
