#!/usr/bin/env python3
"""Command-line front end: ``dynamo-sim``."""

import argparse
import logging
import sys
from typing import List, Optional

from quantum_dynamo.db import RegistryConfig, RunCRUD
from quantum_dynamo.exceptions import ConfigValidationError, UnknownPresetError
from quantum_dynamo.harness.compare import Metric, compare_files
from quantum_dynamo.harness.config import ExperimentConfig, SolverKind
from quantum_dynamo.harness.loader import load_config
from quantum_dynamo.harness.presets import PRESETS, get_preset
from quantum_dynamo.harness.runner import RunManifest, rerun, run
from quantum_dynamo.settings import settings

logger = logging.getLogger(__name__)


def configure_logging(verbose: bool = False) -> None:
    level = logging.DEBUG if verbose else getattr(logging, settings.log_level, logging.INFO)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def _with_seed(config: ExperimentConfig, seed: Optional[int]) -> ExperimentConfig:
    if seed is None:
        return config
    return config.model_copy(update={"options": config.options.model_copy(update={"seed": seed})})


def print_manifest(manifest: RunManifest) -> None:
    print(f"Run {manifest.config_hash[:12]} -> {manifest.out_dir}")
    for pt in manifest.points:
        label = ", ".join(f"{k}={v}" for k, v in pt.overrides.items()) or "single point"
        line = f"  point_{pt.index}: {pt.status} ({label})"
        if pt.error:
            line += f" - {pt.error}"
        elif pt.flags:
            line += f" flags: {', '.join(pt.flags)}"
        print(line)
    print(f"Status: {manifest.status}")


def list_presets() -> None:
    print("Available presets:")
    for name, (description, _) in PRESETS.items():
        print(f"  {name:<22} {description}")


def list_runs(registry: RegistryConfig, solver: Optional[str] = None) -> None:
    registry.create_tables()
    session = next(registry.get_session())
    try:
        runs = RunCRUD.get_all(session, solver)
        if not runs:
            print("No runs recorded.")
            return
        print(f"{'id':>4}  {'solver':<8} {'preset':<20} {'status':<8} {'hash':<12}  out_dir")
        for r in runs:
            print(f"{r.id:>4}  {r.solver:<8} {r.preset or '-':<20} {r.status:<8} {r.config_hash[:12]}  {r.out_dir}")
    finally:
        session.close()


def _add_run_options(parser: argparse.ArgumentParser, config_required: bool) -> None:
    parser.add_argument("--config", required=config_required, help="INI experiment file")
    parser.add_argument("--out", help="Output directory")
    parser.add_argument("--workers", type=int, help="Worker processes (default: all cores)")
    parser.add_argument("--seed", type=int, help="Base seed for stochastic solvers")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    common.add_argument("-q", "--quiet", action="store_true", help="No progress bars")
    common.add_argument("--no-registry", action="store_true", help="Do not record the run")

    parser = argparse.ArgumentParser(
        prog="dynamo-sim",
        description="Simulate the driven spin-boson quantum dynamo and write CSV data",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        parents=[common],
        epilog="""
Examples:
  dynamo-sim ed --config one_mode.ini --out runs/one_mode
  dynamo-sim sse --config weak.ini --workers 8 --seed 42
  dynamo-sim chern_sweep --out runs/chern
  dynamo-sim list-presets
  dynamo-sim compare runs/a/point_0/spin.csv runs/b/point_0/spin.csv --column sz
  dynamo-sim rerun runs/chern/manifest.json
  dynamo-sim runs
        """,
    )
    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    for solver in SolverKind:
        sub = subparsers.add_parser(solver.value, parents=[common], help=f"Run the {solver.value} solver")
        _add_run_options(sub, config_required=True)

    for name, (description, _) in PRESETS.items():
        sub = subparsers.add_parser(name, parents=[common], help=description)
        _add_run_options(sub, config_required=False)

    subparsers.add_parser("list-presets", parents=[common], help="List available presets")

    compare_parser = subparsers.add_parser("compare", parents=[common], help="Compare one column of two CSV tables")
    compare_parser.add_argument("first", help="First CSV file")
    compare_parser.add_argument("second", help="Second CSV file (interpolated onto the first)")
    compare_parser.add_argument("--column", default="sz", help="Column to compare")
    compare_parser.add_argument("--metric", choices=[m.value for m in Metric], default=Metric.MAX_ABS.value)
    compare_parser.add_argument("--marks", help="Comma-separated mark times for rel_at_marks")

    rerun_parser = subparsers.add_parser("rerun", parents=[common], help="Re-execute a manifest's configuration")
    rerun_parser.add_argument("manifest", help="Path to manifest.json")
    rerun_parser.add_argument("--out", help="Output directory")
    rerun_parser.add_argument("--workers", type=int, help="Worker processes")

    runs_parser = subparsers.add_parser("runs", parents=[common], help="List recorded runs")
    runs_parser.add_argument("--solver", help="Only runs of this solver")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point; returns 0 on success, 2 on partial sweep failure, 1 on errors."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return 0

    configure_logging(args.verbose)
    progress = not args.quiet

    try:
        if args.command == "list-presets":
            list_presets()
            return 0
        if args.command == "runs":
            list_runs(RegistryConfig(), args.solver)
            return 0
        if args.command == "compare":
            marks = [float(x) for x in args.marks.split(",")] if args.marks else None
            report = compare_files(args.first, args.second, args.column, Metric(args.metric), marks)
            where = f" at t={report.worst_t:.6g}" if report.worst_t is not None else ""
            print(f"{report.metric.value}({args.column}) = {report.value:.6g}{where} over {report.n_samples} samples")
            return 0
        registry = None if args.no_registry else RegistryConfig()
        if args.command == "rerun":
            manifest = rerun(args.manifest, args.out, args.workers, progress, registry)
            print_manifest(manifest)
            return manifest.exit_code

        if args.command in PRESETS:
            config = get_preset(args.command)
            if args.config:
                config = load_config(args.config, {"solver": config.solver.value, "preset": args.command})
        else:
            config = load_config(args.config, {"solver": args.command})
        config = _with_seed(config, args.seed)
        manifest = run(config, args.out, args.workers, progress, registry)
        print_manifest(manifest)
        return manifest.exit_code
    except (ConfigValidationError, UnknownPresetError) as e:
        print(f"Error: {e}")
        if isinstance(e, ConfigValidationError) and e.keys:
            print(f"Offending keys: {', '.join(e.keys)}")
        return 1
    except Exception as e:
        print(f"Error: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
