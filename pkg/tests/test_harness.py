"""Tests for experiment configuration, presets, output files and the runner."""

import math

import numpy as np
import pandas as pd
import pytest

from quantum_dynamo.db import RunCRUD
from quantum_dynamo.exceptions import ArgumentError, ConfigValidationError, UnknownPresetError
from quantum_dynamo.harness.compare import Metric, compare, compare_files
from quantum_dynamo.harness.config import ExperimentConfig, SolverKind, config_hash, set_path
from quantum_dynamo.harness.io import read_json, write_frame, write_json
from quantum_dynamo.harness.loader import load_config, parse_ini
from quantum_dynamo.harness.presets import get_preset, preset_names
from quantum_dynamo.harness.runner import rerun, run

ONE_MODE_INI = """
[run]
solver = analytic

[model]
H = 1.0
v = 0.04
preparation = P1

[bath]
kind = modes
resonant = true
gs = 0.01

[grid]
n_half = 1
steps_per_half = 50

[sweep]
bath.gs.0 = 0.01, 0.02
"""


def _analytic(**extra):
    data = {
        "solver": "analytic",
        "model": {"H": 1.0, "v": 0.04},
        "bath": {"kind": "modes", "resonant": True, "gs": [0.01]},
        "grid": {"n_half": 1, "steps_per_half": 50},
    }
    data.update(extra)
    return data


class TestConfig:
    def test_minimal(self):
        config = ExperimentConfig.from_dict(_analytic())
        assert config.solver is SolverKind.ANALYTIC
        assert config.grid.time_grid(config.model).n_steps == 50
        ms = config.bath.mode_set(config.model)
        assert ms.omegas[0] == pytest.approx(0.04)

    def test_errors_list_offending_keys(self):
        data = _analytic()
        del data["grid"]
        data["model"] = {"H": 1.0}
        data["bath"]["colour"] = "blue"
        with pytest.raises(ConfigValidationError) as err:
            ExperimentConfig.from_dict(data)
        assert {"grid", "model.v", "bath.colour"} <= set(err.value.keys)

    def test_ed_needs_modes(self):
        with pytest.raises(ConfigValidationError):
            ExperimentConfig.from_dict(_analytic(solver="ed", bath={"kind": "continuum"}))

    def test_grid_needs_exactly_one_span(self):
        with pytest.raises(ConfigValidationError) as err:
            ExperimentConfig.from_dict(_analytic(grid={"n_half": 1, "tf": 10.0}))
        assert "grid" in err.value.keys

    def test_unknown_initial_state(self):
        with pytest.raises(ConfigValidationError) as err:
            ExperimentConfig.from_dict(_analytic(options={"rho0": "sideways"}))
        assert "options.rho0" in err.value.keys

    def test_product_sweep(self):
        config = ExperimentConfig.from_dict(
            _analytic(sweep={"axes": {"model.alpha": [0.1, 0.2], "model.v": [0.04, 1.0]}})
        )
        points = config.point_configs()
        assert len(points) == 4
        assert [cfg.model.v for _, cfg in points] == [0.04, 1.0, 0.04, 1.0]
        assert points[3][0] == {"model.alpha": 0.2, "model.v": 1.0}
        assert all(cfg.sweep is None for _, cfg in points)

    def test_zip_sweep(self):
        config = ExperimentConfig.from_dict(
            _analytic(
                sweep={"axes": {"bath.omegas.0": [0.02, 0.04]}, "mode": "zip"},
                bath={"kind": "modes", "omegas": [0.04], "gs": [0.01]},
            )
        )
        assert [cfg.bath.omegas[0] for _, cfg in config.point_configs()] == [0.02, 0.04]

    def test_zip_needs_equal_lengths(self):
        sweep = {"axes": {"model.v": [0.1, 0.2], "model.H": [1.0]}, "mode": "zip"}
        with pytest.raises(ConfigValidationError):
            ExperimentConfig.from_dict(_analytic(sweep=sweep))

    def test_set_path_extends_lists(self):
        data = {"bath": {"gs": [0.1]}}
        set_path(data, "bath.gs.2", 0.3)
        set_path(data, "model.v", 0.5)
        assert data == {"bath": {"gs": [0.1, None, 0.3]}, "model": {"v": 0.5}}

    def test_hash_ignores_key_order_and_output_location(self):
        a = _analytic()
        b = dict(reversed(list(_analytic(out_dir="/tmp/elsewhere", workers=3).items())))
        assert config_hash(ExperimentConfig.from_dict(a)) == config_hash(ExperimentConfig.from_dict(b))
        c = _analytic(model={"H": 1.0, "v": 0.05})
        assert config_hash(ExperimentConfig.from_dict(a)) != config_hash(ExperimentConfig.from_dict(c))
        assert len(config_hash(ExperimentConfig.from_dict(a))) == 64


class TestLoader:
    def test_parse_ini(self):
        data = parse_ini(ONE_MODE_INI)
        assert data["solver"] == "analytic"
        assert data["model"] == {"H": 1.0, "v": 0.04, "preparation": "P1"}
        assert data["bath"]["gs"] == [0.01]
        assert data["bath"]["resonant"] is True
        assert data["sweep"] == {"axes": {"bath.gs.0": [0.01, 0.02]}, "mode": "product"}

    def test_solver_section_maps_to_options(self):
        data = parse_ini("[solver]\nn_traj = 200\ntruncation = 4, 3\n[sweep]\nsolver.seed = 1, 2\nmode = zip\n")
        assert data["options"] == {"n_traj": 200, "truncation": [4, 3]}
        assert data["sweep"] == {"axes": {"options.seed": [1, 2]}, "mode": "zip"}

    def test_unknown_section(self):
        with pytest.raises(ConfigValidationError) as err:
            parse_ini("[plot]\ncolour = red\n")
        assert err.value.keys == ["plot"]

    def test_syntax_error(self):
        with pytest.raises(ConfigValidationError):
            parse_ini("H = 1.0\n")

    def test_load_with_override(self, tmp_path):
        path = tmp_path / "one_mode.ini"
        path.write_text(ONE_MODE_INI)
        config = load_config(path, {"solver": "ed", "preset": None})
        assert config.solver is SolverKind.ED
        assert len(config.point_configs()) == 2

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigValidationError) as err:
            load_config(tmp_path / "absent.ini")
        assert err.value.keys == ["--config"]


class TestPresets:
    @pytest.mark.parametrize("name", preset_names())
    def test_every_preset_validates(self, name):
        config = get_preset(name)
        assert config.preset == name
        assert config.point_configs()

    def test_twelve_modes(self):
        config = get_preset("twelve_modes")
        ms = config.bath.mode_set(config.model)
        assert len(ms) == 12
        assert config.options.truncation == [2] * 12
        assert not config.options.strict

    def test_omega_sweep_keeps_ratio(self):
        config = get_preset("one_mode_omega_sweep")
        ratios = [cfg.bath.gs[0] ** 2 / cfg.bath.omegas[0] for _, cfg in config.point_configs()]
        np.testing.assert_allclose(ratios, ratios[0])

    def test_unknown(self):
        with pytest.raises(UnknownPresetError) as err:
            get_preset("nope")
        assert isinstance(err.value, KeyError)
        assert str(err.value).startswith("unknown preset 'nope'")


class TestIO:
    def test_nan_becomes_empty_field(self, tmp_path):
        path = write_frame(pd.DataFrame({"t": [0.0, 1.0], "sy": [0.5, np.nan]}), tmp_path / "a" / "spin.csv")
        assert path.read_text().splitlines() == ["t,sy", "0,0.5", "1,"]

    def test_json_is_plain(self, tmp_path):
        path = write_json({"b": np.float64(np.inf), "a": np.arange(2), "c": np.bool_(True)}, tmp_path / "r.json")
        assert read_json(path) == {"a": [0, 1], "b": None, "c": True}
        assert path.read_text().index('"a"') < path.read_text().index('"b"')


class TestCompare:
    def test_identical(self):
        x = np.linspace(0, 1, 11)
        assert compare(x, x).value == 0.0

    def test_shifted_series(self):
        dt = 1e-3
        t = np.arange(0, 10, dt)
        report = compare(np.sin(t), np.sin(t + dt), t=t)
        assert report.value == pytest.approx(dt, rel=1e-3)
        assert report.n_samples == t.size
        rms = compare(np.sin(t), np.sin(t + dt), Metric.RMS)
        assert rms.value < report.value

    def test_relative_at_marks(self):
        t = np.linspace(0, 2, 3)
        report = compare([1.0, 2.2, 4.0], [1.0, 2.0, 4.0], "rel_at_marks", t=t, marks=[1.0, 2.0])
        assert report.value == pytest.approx(0.1)
        assert report.worst_t == 1.0
        with pytest.raises(ArgumentError):
            compare([1.0], [1.0], "rel_at_marks")

    def test_nan_samples_skipped(self):
        report = compare([0.0, np.nan, 1.0], [0.0, 5.0, 1.5])
        assert report.value == pytest.approx(0.5)
        assert report.n_samples == 2

    def test_shape_mismatch(self):
        with pytest.raises(ArgumentError):
            compare([0.0, 1.0], [0.0])

    def test_files(self, tmp_path):
        t = np.linspace(0, 1, 5)
        write_frame(pd.DataFrame({"t": t, "sz": t}), tmp_path / "a.csv")
        write_frame(pd.DataFrame({"t": t[::2], "sz": t[::2] + 0.1}), tmp_path / "b.csv")
        report = compare_files(tmp_path / "a.csv", tmp_path / "b.csv", "sz")
        assert report.value == pytest.approx(0.1)
        with pytest.raises(ArgumentError):
            compare_files(tmp_path / "a.csv", tmp_path / "b.csv", "sx")


class TestRunner:
    def test_single_point(self, tmp_path):
        manifest = run(ExperimentConfig.from_dict(_analytic()), tmp_path / "out", workers=1)
        assert manifest.exit_code == 0
        assert manifest.status == "ok"
        out = tmp_path / "out"
        for name in manifest.files:
            assert (out / name).exists()
        assert "point_0/analytic.csv" in manifest.files
        frame = pd.read_csv(out / "point_0" / "analytic.csv")
        assert {"t", "sx_free", "h_weak", "E_dyn"} <= set(frame.columns)
        stored = read_json(out / "manifest.json")
        assert stored["config_hash"] == manifest.config_hash
        assert stored["files"] == manifest.files
        report = read_json(out / "point_0" / "report.json")
        assert report["dE_dyn_half"] == pytest.approx(math.pi**2 * 0.01**2 / (16 * 0.04))

    def test_partial_failure_continues(self, tmp_path):
        config = ExperimentConfig.from_dict(
            {
                "solver": "gkls",
                "model": {"H": 1.0, "v": 1.0, "alpha": 0.01},
                "grid": {"tf": 1.0, "n_steps": 10},
                "sweep": {"axes": {"model.M": [0.0, 0.5]}},
            }
        )
        manifest = run(config, tmp_path / "out", workers=1)
        assert manifest.status == "partial"
        assert manifest.exit_code == 2
        ok, failed = manifest.points
        assert ok.status == "ok"
        assert "point_0/spin.csv" in manifest.files
        assert failed.status == "failed"
        assert failed.error.startswith("DomainError")

    def test_rerun_is_bit_exact(self, tmp_path):
        config = ExperimentConfig.from_dict(_analytic(sweep={"axes": {"bath.gs.0": [0.01, 0.02]}}))
        first = run(config, tmp_path / "a", workers=1)
        second = rerun(tmp_path / "a" / "manifest.json")
        assert second.out_dir == tmp_path / "a-rerun"
        assert second.config_hash == first.config_hash
        for name in first.files:
            if name.endswith(".csv"):
                assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "a-rerun" / name).read_bytes()

    def test_registry_records_run(self, tmp_path, registry):
        manifest = run(ExperimentConfig.from_dict(_analytic()), tmp_path / "out", workers=1, registry=registry)
        with next(registry.get_session()) as session:
            record = RunCRUD.get_by_id(session, manifest.run_id)
            assert record.status == "ok"
            assert record.solver == "analytic"
            assert record.config_hash == manifest.config_hash
            assert sorted(o.path for o in record.outputs) == sorted(manifest.files[1:])

    def test_niba_plateau_option(self, tmp_path):
        data = {
            "solver": "niba",
            "model": {"H": 1.0, "v": 1.0, "alpha": 0.2},
            "grid": {"tf": 1.0, "n_steps": 40},
        }
        exact = ExperimentConfig.from_dict(data)
        assert not exact.options.use_Q1_plateau
        plateau = ExperimentConfig.from_dict(dict(data, options={"use_Q1_plateau": True}))
        run(exact, tmp_path / "exact", workers=1)
        run(plateau, tmp_path / "plateau", workers=1)
        a = pd.read_csv(tmp_path / "exact" / "point_0" / "spin.csv")
        b = pd.read_csv(tmp_path / "plateau" / "point_0" / "spin.csv")
        assert a["sz"].iloc[0] == b["sz"].iloc[0] == 1.0
        assert not np.allclose(a["sz"], b["sz"])
