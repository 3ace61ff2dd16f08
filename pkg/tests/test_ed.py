"""Tests for the exact-diagonalization engine."""

import numpy as np
import pytest

from quantum_dynamo.analytic import OneModeParams, free_spin, frozen_field, one_mode_weak_field
from quantum_dynamo.exceptions import ArgumentError, PreparationError
from quantum_dynamo.model.params import ModelParams, ModeSet, TimeGrid
from quantum_dynamo.solvers.ed import FockTruncation, measure_field, prepare_state, propagate, required_levels, run_ed


class TestPreparation:
    def test_required_levels(self):
        ms = ModeSet.from_arrays([0.5, 1.0], [1.0, 0.0])
        assert required_levels(ms) == [35, 10]

    def test_displaced_occupation(self):
        ms = ModeSet.single(omega=0.5, g=0.4)
        state = prepare_state(ModelParams(v=0.04), ms, FockTruncation.for_modes(ms))
        prob = np.abs(state.tensor[0]) ** 2
        assert state.norm == pytest.approx(1.0)
        assert np.sum(prob * np.arange(prob.size)) == pytest.approx(0.4**2 / (4 * 0.5**2), rel=1e-8)
        assert np.sum(np.abs(state.tensor[1]) ** 2) == 0.0

    def test_vacuum_preparation(self):
        ms = ModeSet.single(omega=0.5, g=0.4)
        state = prepare_state(ModelParams(v=0.04, preparation="P2"), ms, FockTruncation.uniform(3, 1))
        assert state.tensor[0, 0] == 1.0
        assert state.flags == ()

    def test_strict_truncation_rule(self):
        ms = ModeSet.single(omega=0.1, g=1.0)
        with pytest.raises(PreparationError) as err:
            prepare_state(ModelParams(v=0.04), ms, FockTruncation.uniform(5, 1))
        assert err.value.required == required_levels(ms)

    def test_relaxed_truncation_flags(self):
        ms = ModeSet.single(omega=0.1, g=1.0)
        state = prepare_state(ModelParams(v=0.04), ms, FockTruncation.uniform(5, 1), strict=False)
        assert "truncation_below_rule" in state.flags

    def test_truncation_count_must_match(self):
        ms = ModeSet.from_arrays([0.5, 1.0], [0.1, 0.1])
        with pytest.raises(ArgumentError):
            prepare_state(ModelParams(v=0.04), ms, FockTruncation.uniform(10, 1))


class TestPropagation:
    def test_uncoupled_spin_matches_closed_form(self):
        p = ModelParams(H=1.0, v=0.5)
        ms = ModeSet.single(omega=0.5, g=0.0)
        grid = TimeGrid.half_periods(v=0.5, n_half=6, steps_per_half=100)
        res = run_ed(p, ms, grid, tol=1e-11)
        sx, sy, sz = free_spin(grid.times, 1.0, 0.5)
        np.testing.assert_allclose(res.trajectory.sx, sx, atol=1e-8)
        np.testing.assert_allclose(res.trajectory.sy, sy, atol=1e-8)
        np.testing.assert_allclose(res.trajectory.sz, sz, atol=1e-8)
        t = grid.times
        e_spin = -0.5 * (np.cos(0.5 * t) * res.trajectory.sz + np.sin(0.5 * t) * res.trajectory.sx)
        np.testing.assert_allclose(res.trajectory.w_dr, e_spin - e_spin[0], atol=1e-7)

    def test_field_reconstruction_is_exact(self):
        p = ModelParams(H=1.0, v=0.3)
        ms = ModeSet.from_arrays([0.3, 0.9], [0.1, 0.15])
        grid = TimeGrid.half_periods(v=0.3, n_half=1, steps_per_half=1000)
        res = run_ed(p, ms, grid, tol=1e-10)
        assert res.reconstruction_error < 1e-5
        assert res.trajectory.bloch_excess() < 1e-8

    def test_heisenberg_consistency(self):
        p = ModelParams(H=1.0, v=0.3)
        ms = ModeSet.single(omega=0.3, g=0.2)
        grid = TimeGrid.half_periods(v=0.3, n_half=1, steps_per_half=2000)
        traj = run_ed(p, ms, grid, tol=1e-10).trajectory
        numeric = np.gradient(traj.sz, grid.dt)
        np.testing.assert_allclose(traj.sz_dot[1:-1], numeric[1:-1], atol=1e-3)

    def test_measured_field_starts_displaced(self):
        p = ModelParams(H=1.0, v=0.3)
        ms = ModeSet.single(omega=0.5, g=0.2)
        grid = TimeGrid(tf=1.0, n_steps=10)
        state = prepare_state(p, ms, FockTruncation.for_modes(ms))
        _, record = propagate(state, p, ms, grid)
        field = measure_field(record, ms)
        assert field.h_total[0] == pytest.approx(-0.2**2 / 0.5, rel=1e-8)
        assert record.n[0, 0] == pytest.approx(0.2**2 / (4 * 0.5**2), rel=1e-8)
        assert record.metadata["norm_drift"] < 1e-6

    def test_state_and_modes_must_agree(self):
        p = ModelParams(v=0.3)
        state = prepare_state(p, ModeSet.single(0.3, 0.1), FockTruncation.uniform(10, 1))
        with pytest.raises(ArgumentError):
            propagate(state, p, ModeSet.from_arrays([0.3, 0.6], [0.1, 0.1]), TimeGrid(tf=1.0, n_steps=4))


class TestOneModeRegimes:
    def test_weak_resonant_field_grows(self):
        p = ModelParams(H=1.0, v=0.04)
        ms = ModeSet.single(omega=0.04, g=0.01)
        grid = TimeGrid.half_periods(v=0.04, n_half=2, steps_per_half=400)
        res = run_ed(p, ms, grid, tol=1e-10)
        expected = one_mode_weak_field(grid.times, OneModeParams(omega=0.04, g=0.01, v=0.04))
        envelope = np.max(np.abs(expected))
        assert np.max(np.abs(res.measured.h_total - expected)) <= 0.05 * envelope
        assert res.record.valid

    def test_frozen_limit(self):
        p = ModelParams(H=1.0, v=0.04)
        ms = ModeSet.single(omega=1.0, g=np.sqrt(20.0))
        grid = TimeGrid.half_periods(v=0.04, n_half=1, steps_per_half=200)
        res = run_ed(p, ms, grid, tol=1e-9)
        assert np.max(np.abs(res.trajectory.sz - 1)) <= 0.05
        expected = frozen_field(grid.times, OneModeParams(omega=1.0, g=np.sqrt(20.0), v=0.04))
        np.testing.assert_allclose(res.measured.h_total, expected, rtol=0.05)
