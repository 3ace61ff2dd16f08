"""Tests for parameters, spectral densities, kernels and induced fields."""

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.integrate import quad

from quantum_dynamo.exceptions import ArgumentError, DomainError
from quantum_dynamo.model.bath import (
    BathCorrelation,
    discretize_bath,
    memory_kernel,
    mode_kernel,
    reorganization_field,
    spectral_density,
)
from quantum_dynamo.model.field import (
    decompose_field_continuum,
    free_kernel,
    induced_field_from_sz,
    integrated_dynamic_field,
    mode_fields,
)
from quantum_dynamo.model.params import Cutoff, ModelParams, ModeSet, Preparation, TimeGrid
from quantum_dynamo.model.series import SpinTrajectory

from .conftest import adiabatic_trajectory


def _frozen(grid: TimeGrid) -> SpinTrajectory:
    n = grid.n_points
    return SpinTrajectory(grid=grid, sx=np.zeros(n), sy=np.zeros(n), sz=np.ones(n), sz_dot=np.zeros(n))


class TestParams:
    def test_v_is_required(self):
        with pytest.raises(ValidationError):
            ModelParams(H=1.0)

    def test_rabi_frequency_and_half_period(self):
        p = ModelParams(H=3.0, v=4.0)
        assert p.omega == pytest.approx(5.0)
        assert p.half_period == pytest.approx(np.pi / 4)

    def test_delta_1_follows_preparation(self):
        assert ModelParams(v=0.1).delta_1 == 1.0
        assert ModelParams(v=0.1, preparation="P2").delta_1 == 0.0

    def test_scaling_limit(self):
        with pytest.raises(DomainError):
            ModelParams(H=1.0, v=2.0, omega_c=1.5).assert_scaling_limit()
        ModelParams(H=1.0, v=0.04, omega_c=100.0).assert_scaling_limit()

    def test_params_are_frozen(self):
        p = ModelParams(v=0.04)
        with pytest.raises(ValidationError):
            p.H = 2.0
        assert p.replace(H=2.0).H == 2.0

    def test_time_grid_needs_positive_span(self):
        with pytest.raises(ValidationError):
            TimeGrid(t0=1.0, tf=1.0, n_steps=10)

    def test_half_period_grid(self):
        grid = TimeGrid.half_periods(v=0.04, n_half=2, steps_per_half=100)
        assert grid.n_points == 201
        assert grid.tf == pytest.approx(2 * np.pi / 0.04)
        assert grid.dt == pytest.approx(np.pi / 0.04 / 100)

    def test_mode_set_must_be_increasing(self):
        with pytest.raises(ValidationError):
            ModeSet.from_arrays([0.2, 0.1], [0.01, 0.01])
        with pytest.raises(ValidationError):
            ModeSet(modes=())

    def test_reorganization(self):
        ms = ModeSet.from_arrays([0.5, 1.0], [0.1, 0.2])
        assert ms.reorganization == pytest.approx(0.01 / 0.5 + 0.04 / 1.0)


class TestSpectralDensity:
    def test_exponential_cutoff(self):
        p = ModelParams(v=0.04, alpha=0.1, omega_c=10.0)
        assert spectral_density(2.0, p) == pytest.approx(2 * np.pi * 0.1 * 2.0 * np.exp(-0.2))

    def test_hard_cutoff_vanishes_above(self):
        p = ModelParams(v=0.04, alpha=0.1, omega_c=10.0, cutoff=Cutoff.HARD)
        out = spectral_density(np.array([5.0, 10.0, 10.5]), p)
        assert out[0] == pytest.approx(2 * np.pi * 0.1 * 5.0)
        assert out[2] == 0.0

    def test_negative_frequency_rejected(self):
        with pytest.raises(DomainError):
            spectral_density(-1.0, ModelParams(v=0.04, alpha=0.1))

    def test_reorganization_matches_quadrature(self):
        p = ModelParams(v=0.04, alpha=0.05, omega_c=20.0)
        value, _ = quad(lambda w: spectral_density(w, p) / (np.pi * w), 0, np.inf)
        assert reorganization_field(p) == pytest.approx(value, rel=1e-6)


class TestKernels:
    def test_exponential_kernel_value(self):
        p = ModelParams(v=0.04, alpha=0.02, omega_c=100.0)
        assert memory_kernel(0.01, p) == pytest.approx(-400.0)

    def test_exponential_kernel_matches_quadrature(self):
        p = ModelParams(v=0.04, alpha=0.02, omega_c=10.0)
        t = 0.3
        value, _ = quad(lambda w: spectral_density(w, p), 0, np.inf, weight="sin", wvar=t)
        assert memory_kernel(t, p) == pytest.approx(-2 * value / np.pi, rel=1e-6)

    @pytest.mark.parametrize("cutoff", [Cutoff.EXPONENTIAL, Cutoff.HARD])
    def test_kernel_is_odd(self, cutoff):
        p = ModelParams(v=0.04, alpha=0.1, omega_c=5.0, cutoff=cutoff)
        t = np.array([1e-5, 0.1, 0.7, 3.0])
        np.testing.assert_allclose(memory_kernel(-t, p), -memory_kernel(t, p))
        assert memory_kernel(0.0, p) == 0.0

    def test_hard_kernel_series_branch_is_continuous(self):
        p = ModelParams(v=0.04, alpha=0.1, omega_c=5.0, cutoff=Cutoff.HARD)
        below = memory_kernel(0.999e-3 / 5.0, p)
        above = memory_kernel(1.001e-3 / 5.0, p)
        assert below == pytest.approx(above, rel=1e-2)

    def test_mode_kernel(self):
        ms = ModeSet.from_arrays([1.0, 2.0], [0.1, 0.2])
        expected = -2 * (0.01 * np.sin(0.5) + 0.04 * np.sin(1.0))
        assert mode_kernel(0.5, ms) == pytest.approx(expected)


class TestDiscretization:
    def test_linear_bins(self):
        p = ModelParams(v=0.04, alpha=0.02, omega_c=100.0)
        ms = discretize_bath(p, 12, 100.0)
        width = 100.0 / 12
        assert len(ms) == 12
        np.testing.assert_allclose(ms.omegas, (np.arange(12) + 0.5) * width)
        np.testing.assert_allclose(ms.gs**2, 2 * 0.02 * ms.omegas * width)

    def test_reorganization_sum(self):
        p = ModelParams(v=0.04, alpha=0.02, omega_c=100.0)
        ms = discretize_bath(p, 40, 50.0)
        assert ms.reorganization == pytest.approx(2 * 0.02 * 50.0)

    def test_rejects_empty(self):
        with pytest.raises(ArgumentError):
            discretize_bath(ModelParams(v=0.04, alpha=0.02), 0, 10.0)


class TestBathCorrelation:
    def test_plateau(self):
        corr = BathCorrelation(alpha=0.1, omega_c=100.0)
        assert corr.Q1(2.0) == pytest.approx(np.pi**2 * 0.1)
        assert corr.Q1(-2.0) == pytest.approx(-np.pi**2 * 0.1)

    def test_exact_q1_approaches_plateau(self):
        corr = BathCorrelation(alpha=0.1, omega_c=100.0, use_Q1_plateau=False)
        assert corr.Q1(0.0) == 0.0
        assert corr.Q1(100.0) == pytest.approx(np.pi**2 * 0.1, rel=1e-4)

    def test_q2(self):
        corr = BathCorrelation(alpha=0.1, omega_c=100.0)
        assert corr.Q2(0.01) == pytest.approx(np.pi * 0.1 * np.log(2.0))


class TestSeries:
    def test_shape_checked(self, half_period_grid):
        with pytest.raises(ArgumentError):
            SpinTrajectory(grid=half_period_grid, sx=[0.0], sy=[0.0], sz=[1.0])

    def test_frame_columns(self, adiabatic_spin):
        adiabatic_spin.extra_columns["validity"] = np.ones(len(adiabatic_spin))
        frame = adiabatic_spin.to_frame()
        assert list(frame.columns) == ["t", "sx", "sy", "sz", "sz_dot", "validity"]

    def test_flags_deduplicate(self, adiabatic_spin):
        adiabatic_spin.with_flags("a", "b").with_flags("a")
        assert adiabatic_spin.flags == ("a", "b")


class TestInducedField:
    def test_frozen_spin_field_is_constant(self):
        ms = ModeSet.single(omega=0.04, g=0.3)
        grid = TimeGrid.half_periods(v=0.04, n_half=2, steps_per_half=200)
        h = mode_fields(_frozen(grid), ms, Preparation.P1)
        np.testing.assert_allclose(h[:, 0], -0.09 / 0.04, rtol=1e-7)

    def test_vacuum_preparation_starts_at_zero(self):
        ms = ModeSet.single(omega=0.04, g=0.3)
        grid = TimeGrid.half_periods(v=0.04, n_half=1, steps_per_half=200)
        h = mode_fields(_frozen(grid), ms, Preparation.P2)
        assert h[0, 0] == pytest.approx(0.0)
        np.testing.assert_allclose(h[:, 0], -(0.09 / 0.04) * (1 - np.cos(0.04 * grid.times)), atol=1e-9)

    def test_mode_decomposition_sums(self, adiabatic_spin, resonant_mode):
        field = induced_field_from_sz(adiabatic_spin, resonant_mode)
        assert field.decomposed
        np.testing.assert_allclose(field.h_free + field.h_ad + field.h_dyn, field.h_total)
        np.testing.assert_allclose(field.h_free, 0.0, atol=1e-15)

    def test_weak_resonant_field(self, resonant_mode):
        grid = TimeGrid.half_periods(v=0.04, n_half=6, steps_per_half=400)
        traj = adiabatic_trajectory(0.04, grid)
        field = induced_field_from_sz(traj, resonant_mode)
        t = grid.times
        g2 = 0.01**2
        expected = -0.5 * g2 * t * np.sin(0.04 * t) - (g2 / 0.04) * np.cos(0.04 * t)
        np.testing.assert_allclose(field.h_total, expected, atol=1e-3 * np.max(np.abs(expected)))

    def test_continuum_free_kernel_at_zero(self, weak_continuum):
        assert free_kernel(np.array([0.0]), weak_continuum)[0] == pytest.approx(reorganization_field(weak_continuum))

    def test_continuum_frozen_spin_decomposition(self, weak_continuum):
        grid = TimeGrid(tf=10.0, n_steps=2000)
        field = decompose_field_continuum(_frozen(grid), weak_continuum)
        np.testing.assert_allclose(field.h_free, 0.0)
        np.testing.assert_allclose(field.h_ad, -2 * 0.01 * 100.0)
        np.testing.assert_allclose(field.h_dyn, 0.0)
        assert field.flags == ()

    def test_short_time_form_matches_plateau_late(self, weak_continuum, adiabatic_spin):
        plateau = decompose_field_continuum(adiabatic_spin, weak_continuum, "plateau")
        short = decompose_field_continuum(adiabatic_spin, weak_continuum, "short_time")
        mid = len(adiabatic_spin) // 2
        assert short.h_dyn[mid] == pytest.approx(plateau.h_dyn[mid], rel=1e-2)

    def test_unknown_dynamic_form(self, weak_continuum, adiabatic_spin):
        with pytest.raises(ArgumentError):
            decompose_field_continuum(adiabatic_spin, weak_continuum, "late")

    def test_integrated_dynamic_field_over_half_period(self, weak_continuum, adiabatic_spin):
        assert integrated_dynamic_field(adiabatic_spin, weak_continuum) == pytest.approx(-2 * 0.01 * np.pi)
