"""Experiment harness: configuration, presets, runs and comparisons."""

from .compare import ComparisonReport, Metric, compare, compare_files
from .config import BathConfig, ExperimentConfig, GridConfig, SolverKind, SolverOptions, SweepConfig, config_hash
from .loader import load_config, parse_ini
from .presets import PRESETS, get_preset, preset_names
from .runner import PointResult, RunManifest, rerun, run, run_point

__all__ = [
    "PRESETS",
    "BathConfig",
    "ComparisonReport",
    "ExperimentConfig",
    "GridConfig",
    "Metric",
    "PointResult",
    "RunManifest",
    "SolverKind",
    "SolverOptions",
    "SweepConfig",
    "compare",
    "compare_files",
    "config_hash",
    "get_preset",
    "load_config",
    "parse_ini",
    "preset_names",
    "rerun",
    "run",
    "run_point",
]
