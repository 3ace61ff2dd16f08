"""Tests for the dynamo-sim command line."""

import numpy as np
import pandas as pd
import pytest

from quantum_dynamo.cli import _with_seed, build_parser, list_runs, main
from quantum_dynamo.harness.config import ExperimentConfig
from quantum_dynamo.harness.io import read_json, write_frame
from quantum_dynamo.harness.runner import run

ANALYTIC_INI = """
[run]
solver = analytic

[model]
v = 0.04

[bath]
kind = modes
resonant = true
gs = 0.01

[grid]
n_half = 1
steps_per_half = 40
"""

GKLS_BIAS_INI = """
[model]
v = 1.0
alpha = 0.01

[grid]
tf = 1.0
n_steps = 10

[sweep]
model.M = 0.0, 0.5
"""


@pytest.fixture
def ini(tmp_path):
    def write(text, name="exp.ini"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return write


def test_no_command_prints_help(capsys):
    assert main([]) == 0
    assert "dynamo-sim" in capsys.readouterr().out


def test_list_presets(capsys):
    assert main(["list-presets"]) == 0
    out = capsys.readouterr().out
    assert "chern_sweep" in out
    assert "twelve_modes" in out


def test_solver_run(tmp_path, ini, capsys):
    out = tmp_path / "out"
    code = main(["analytic", "--config", ini(ANALYTIC_INI), "--out", str(out), "--workers", "1", "-q", "--no-registry"])
    assert code == 0
    assert "Status: ok" in capsys.readouterr().out
    manifest = read_json(out / "manifest.json")
    assert manifest["status"] == "ok"
    assert "point_0/analytic.csv" in manifest["files"]


def test_partial_sweep_exit_code(tmp_path, ini, capsys):
    out = tmp_path / "out"
    code = main(["gkls", "--config", ini(GKLS_BIAS_INI), "--out", str(out), "--workers", "1", "-q", "--no-registry"])
    assert code == 2
    text = capsys.readouterr().out
    assert "point_1: failed" in text
    assert "Status: partial" in text


def test_invalid_config_lists_keys(ini, capsys):
    assert main(["sse", "--config", ini("[plot]\ncolour = red\n"), "--no-registry"]) == 1
    out = capsys.readouterr().out
    assert out.startswith("Error:")
    assert "Offending keys: plot" in out


def test_missing_config_file(tmp_path, capsys):
    assert main(["ed", "--config", str(tmp_path / "absent.ini"), "--no-registry"]) == 1
    assert "config file not found" in capsys.readouterr().out


def test_solver_commands_need_config():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["ed"])


def test_compare(tmp_path, capsys):
    t = np.linspace(0.0, 1.0, 5)
    write_frame(pd.DataFrame({"t": t, "sz": np.cos(t)}), tmp_path / "a.csv")
    write_frame(pd.DataFrame({"t": t, "sz": np.cos(t) + 0.25}), tmp_path / "b.csv")
    assert main(["compare", str(tmp_path / "a.csv"), str(tmp_path / "b.csv"), "--column", "sz"]) == 0
    assert "max_abs(sz) = 0.25" in capsys.readouterr().out


def test_rerun(tmp_path, ini, capsys):
    out = tmp_path / "first"
    assert main(["analytic", "--config", ini(ANALYTIC_INI), "--out", str(out), "-q", "--no-registry"]) == 0
    assert main(["rerun", str(out / "manifest.json"), "-q", "--no-registry"]) == 0
    assert (tmp_path / "first-rerun" / "manifest.json").exists()


def test_seed_override():
    config = ExperimentConfig.from_dict(
        {"solver": "sse", "model": {"v": 0.5, "alpha": 0.1}, "grid": {"tf": 1.0, "n_steps": 10}}
    )
    assert _with_seed(config, None) is config
    seeded = _with_seed(config, 42)
    assert seeded.options.seed == 42
    assert config.options.seed == 0


def test_list_runs(tmp_path, registry, capsys):
    list_runs(registry)
    assert "No runs recorded." in capsys.readouterr().out
    config = ExperimentConfig.from_dict(
        {
            "solver": "analytic",
            "model": {"v": 0.04},
            "bath": {"kind": "modes", "resonant": True, "gs": [0.01]},
            "grid": {"n_half": 1, "steps_per_half": 10},
        }
    )
    manifest = run(config, tmp_path / "out", workers=1, registry=registry)
    list_runs(registry, "analytic")
    out = capsys.readouterr().out
    assert manifest.config_hash[:12] in out
    assert "analytic" in out
