"""Experiment orchestration: solver dispatch, sweeps, manifests and the run registry."""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from sqlalchemy.exc import SQLAlchemyError
from tqdm import tqdm

from quantum_dynamo import __version__
from quantum_dynamo.analytic import (
    KondoParams,
    OneModeParams,
    adiabatic_renormalized_sz,
    bethe_sx,
    dynamo_predictions,
    free_spin,
    frozen_field,
    gkls_orbit,
    one_mode_energies,
    one_mode_weak_field,
    orbit_partner,
    orbit_state,
)
from quantum_dynamo.db import RegistryConfig, RunCRUD
from quantum_dynamo.energetics import (
    EnergyLedger,
    RelationMode,
    average_power,
    build_continuum_ledger,
    build_ledger,
    chern_numbers,
    efficiencies,
    efficiency_marks,
    topology_energy_relation,
)
from quantum_dynamo.exceptions import DynamoError
from quantum_dynamo.harness.config import BathKind, ExperimentConfig, SolverKind, config_hash
from quantum_dynamo.harness.io import read_json, write_frame, write_json
from quantum_dynamo.model.field import decompose_field_continuum, integrated_dynamic_field
from quantum_dynamo.model.params import ModelParams
from quantum_dynamo.model.series import SpinTrajectory
from quantum_dynamo.settings import settings
from quantum_dynamo.solvers.ed import FockTruncation, run_ed
from quantum_dynamo.solvers.gkls import (
    DensityMatrix2,
    Frame,
    build_rates,
    orbit_distance,
    propagate_gkls,
    stationary_power,
    stationary_report,
)
from quantum_dynamo.solvers.niba import solve_niba
from quantum_dynamo.solvers.sse import DEFAULT_SSE_TOL, average

logger = logging.getLogger(__name__)

Files = List[Tuple[str, str]]


@dataclass
class PointResult:
    """Outcome of one sweep point."""

    index: int
    overrides: Dict[str, Any]
    status: str
    files: Files = field(default_factory=list)
    error: Optional[str] = None
    flags: Tuple[str, ...] = ()

    def as_dict(self) -> Dict[str, Any]:
        return {
            "index": self.index,
            "overrides": self.overrides,
            "status": self.status,
            "error": self.error,
            "flags": list(self.flags),
            "files": [{"kind": kind, "path": path} for kind, path in self.files],
        }


@dataclass
class RunManifest:
    """Everything needed to audit and reproduce a run."""

    config: Dict[str, Any]
    config_hash: str
    code_version: str
    out_dir: Path
    started_at: str
    finished_at: Optional[str] = None
    points: List[PointResult] = field(default_factory=list)
    run_id: Optional[int] = None

    @property
    def n_failed(self) -> int:
        return sum(1 for pt in self.points if pt.status != "ok")

    @property
    def status(self) -> str:
        if self.n_failed == 0:
            return "ok"
        return "failed" if self.n_failed == len(self.points) else "partial"

    @property
    def exit_code(self) -> int:
        return 0 if self.n_failed == 0 else 2

    @property
    def files(self) -> List[str]:
        out = ["config.json"]
        for pt in self.points:
            out.extend(path for _, path in pt.files)
        return out

    def as_dict(self) -> Dict[str, Any]:
        return {
            "config": self.config,
            "config_hash": self.config_hash,
            "code_version": self.code_version,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "status": self.status,
            "n_failed": self.n_failed,
            "run_id": self.run_id,
            "points": [pt.as_dict() for pt in self.points],
            "files": self.files,
        }

    def write(self) -> Path:
        return write_json(self.as_dict(), self.out_dir / "manifest.json")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _marks_report(ledger: EnergyLedger, p: ModelParams) -> Dict[str, Any]:
    report: Dict[str, Any] = {
        "efficiency_final": efficiencies(ledger, p),
        "efficiency_marks": efficiency_marks(ledger, p),
        "dE_dyn_final": ledger.at(ledger.t[-1], "E_dyn"),
        "W_dr_final": float(ledger.W_dr[-1]),
        "E_fluct_min": float(np.nanmin(ledger.E_fluct)),
    }
    if ledger.t[-1] - ledger.t[0] >= p.half_period * (1 - 1e-9):
        report["average_power_half"] = average_power(ledger, p.half_period, marks=[1])
    return report


def _topology_report(traj: SpinTrajectory, ledger: EnergyLedger, p: ModelParams, g: Optional[float]) -> Dict[str, Any]:
    if traj.t[-1] - traj.t[0] < p.half_period * (1 - 1e-9):
        return {}
    chern = chern_numbers(traj, p)
    report: Dict[str, Any] = {"C": chern.C, "C_dyn": chern.C_dyn, "C_dyn_integral": chern.C_dyn_integral}
    mode = RelationMode.ONE_MODE if g is not None else RelationMode.CONTINUUM
    predicted, measured, deviation = topology_energy_relation(ledger, p, mode, chern.C_dyn, g=g)
    report["topology_relation"] = {
        "mode": mode.value,
        "predicted": predicted,
        "measured": measured,
        "relative_deviation": deviation,
    }
    return report


def _write(out: Path, name: str, kind: str, frame: pd.DataFrame, files: Files) -> None:
    write_frame(frame, out / name)
    files.append((kind, name))


def _run_ed(cfg: ExperimentConfig, out: Path, workers: int) -> Tuple[Files, Dict[str, Any], Tuple[str, ...]]:
    p = cfg.model
    ms = cfg.bath.mode_set(p)
    grid = cfg.grid.time_grid(p)
    levels = cfg.options.truncation
    truncation = None
    if levels:
        if len(levels) == 1:
            truncation = FockTruncation.uniform(levels[0], len(ms))
        else:
            truncation = FockTruncation(levels=tuple(levels))
    res = run_ed(p, ms, grid, truncation, cfg.options.tol, cfg.options.strict)
    ledger = build_ledger(res.trajectory, res.record, ms, p)

    files: Files = []
    _write(out, "spin.csv", "spin", res.trajectory.to_frame(), files)
    field_frame = res.measured.to_frame()
    recon = res.reconstructed
    field_frame["h_reconstructed"] = recon.h_total
    field_frame["h_free"] = recon.h_free
    field_frame["h_ad"] = recon.h_ad
    field_frame["h_dyn"] = recon.h_dyn
    _write(out, "field.csv", "field", field_frame, files)
    bath = {"t": grid.times}
    for k in range(len(ms)):
        bath[f"b_re_{k}"] = res.record.b[:, k].real
        bath[f"b_im_{k}"] = res.record.b[:, k].imag
        bath[f"n_{k}"] = res.record.n[:, k]
    _write(out, "bath.csv", "bath", pd.DataFrame(bath), files)
    _write(out, "ledger.csv", "ledger", ledger.to_frame(), files)

    g = float(ms.gs[0]) if len(ms) == 1 else None
    report = {
        "solver": "ed",
        "n_modes": len(ms),
        "levels": list(res.record.levels),
        "reconstruction_error": res.reconstruction_error,
        "balance_residual": ledger.metadata.get("balance_residual"),
        "occupation_bound": res.record.occupation_bound(),
    }
    report.update(_marks_report(ledger, p))
    report.update(_topology_report(res.trajectory, ledger, p, g))
    return files, report, res.trajectory.flags


def _continuum_outputs(traj: SpinTrajectory, cfg: ExperimentConfig, out: Path, files: Files) -> Dict[str, Any]:
    p = cfg.model
    ledger = build_continuum_ledger(traj, p)
    decomposition = decompose_field_continuum(traj, p, cfg.options.dynamic_form)
    _write(out, "field.csv", "field", decomposition.to_frame(), files)
    _write(out, "ledger.csv", "ledger", ledger.to_frame(), files)
    report = _marks_report(ledger, p)
    report.update(_topology_report(traj, ledger, p, None))
    if traj.t[-1] - traj.t[0] >= p.half_period * (1 - 1e-9):
        report["integrated_dynamic_field"] = integrated_dynamic_field(traj, p)
    return report


def _run_sse(cfg: ExperimentConfig, out: Path, workers: int) -> Tuple[Files, Dict[str, Any], Tuple[str, ...]]:
    p = cfg.model
    grid = cfg.grid.time_grid(p)
    opts = cfg.options
    res = average(
        p,
        grid,
        n_traj=opts.n_traj,
        seed0=opts.seed,
        fourier_modes=opts.fourier_modes,
        tol=opts.tol or DEFAULT_SSE_TOL,
        batch_size=opts.batch_size,
        workers=workers,
    )
    files: Files = []
    _write(out, "spin.csv", "spin", res.to_frame(), files)
    rho = {"t": grid.times}
    for i, name in enumerate(("rho11", "rho12", "rho21", "rho22")):
        entry = res.rho[:, i]
        rho[f"{name}_re"] = entry.real
        rho[f"{name}_im"] = entry.imag
        rho[f"{name}_se"] = res.rho_se[:, i]
    _write(out, "rho.csv", "rho", pd.DataFrame(rho), files)

    report = {"solver": "sse", "n_traj": res.n_traj, "n_valid": res.n_valid, "n_flagged": res.n_flagged, "l1": res.l1}
    report.update(_continuum_outputs(res.trajectory, cfg, out, files))
    quarter = grid.t0 + p.half_period / 2
    if 0 < p.alpha < 0.5 and grid.tf >= quarter:
        sx_quarter = res.trajectory.value_at(quarter, "sx")
        reference = bethe_sx(KondoParams(Delta=p.H, alpha=p.alpha, omega_c=p.omega_c))
        report["sx_quarter"] = {"sse": sx_quarter, "bethe": reference, "deviation": abs(sx_quarter - reference)}
    return files, report, res.flags


def _run_niba(cfg: ExperimentConfig, out: Path, workers: int) -> Tuple[Files, Dict[str, Any], Tuple[str, ...]]:
    p = cfg.model
    traj = solve_niba(p, cfg.grid.time_grid(p), cfg.options.use_Q1_plateau)
    files: Files = []
    _write(out, "spin.csv", "spin", traj.to_frame(), files)
    report = {"solver": "niba", "validity_fraction": float(np.mean(traj.extra_columns["validity"]))}
    report.update(_continuum_outputs(traj, cfg, out, files))
    return files, report, traj.flags


def _initial_density(name: str, p: ModelParams, t0: float) -> DensityMatrix2:
    if name == "up":
        return DensityMatrix2.spin_up()
    if name == "down":
        return DensityMatrix2.pure([0.0, 1.0])
    if name == "orbit":
        return DensityMatrix2.pure(orbit_state(t0, p.H, p.v))
    if name == "partner":
        return DensityMatrix2.pure(orbit_partner(t0, p.H, p.v))
    return DensityMatrix2(np.eye(2) / 2)


def _run_gkls(cfg: ExperimentConfig, out: Path, workers: int) -> Tuple[Files, Dict[str, Any], Tuple[str, ...]]:
    p = cfg.model
    grid = cfg.grid.time_grid(p)
    rates = build_rates(p, lamb_shift=cfg.options.lamb_shift)
    rho0 = _initial_density(cfg.options.rho0, p, grid.t0)
    traj = propagate_gkls(rho0, p, grid, Frame(cfg.options.frame), rates, cfg.options.tol)
    distance = orbit_distance(traj, p)
    traj.extra_columns["orbit_distance"] = distance

    files: Files = []
    _write(out, "spin.csv", "spin", traj.to_frame(), files)
    report: Dict[str, Any] = {"solver": "gkls", "frame": cfg.options.frame, "weak_coupling": rates.weak_coupling}
    report.update(stationary_report(p, rates))
    report["orbit_distance_final"] = float(distance[-1])
    if grid.tf - grid.t0 >= 2 * np.pi / p.v:
        report["stationary_power"] = stationary_power(traj, p)
    report.update(_continuum_outputs(traj, cfg, out, files))
    return files, report, traj.flags


def _run_analytic(cfg: ExperimentConfig, out: Path, workers: int) -> Tuple[Files, Dict[str, Any], Tuple[str, ...]]:
    p = cfg.model
    grid = cfg.grid.time_grid(p)
    t = grid.times
    sx, sy, sz = free_spin(t - grid.t0, p.H, p.v)
    data: Dict[str, Any] = {"t": t, "sx_free": sx, "sy_free": sy, "sz_free": sz}
    report: Dict[str, Any] = {"solver": "analytic"}
    ms = cfg.bath.mode_set(p) if cfg.bath.kind is not BathKind.CONTINUUM else None
    if ms is not None and len(ms) == 1:
        pm = OneModeParams(omega=float(ms.omegas[0]), g=float(ms.gs[0]), H=p.H, v=p.v, preparation=p.preparation)
        data["h_weak"] = one_mode_weak_field(t, pm)
        data["h_frozen"] = frozen_field(t, pm)
        if pm.resonant:
            e_dyn, w_dr, e_fluct = one_mode_energies(t, pm)
            data.update(E_dyn=e_dyn, W_dr=w_dr, E_fluct=e_fluct)
            report["dE_dyn_half"] = float(np.pi**2 * pm.g**2 / (16 * pm.v))
    else:
        ox, oy, oz = gkls_orbit(t, p.H, p.v)
        data.update(sx_orbit=ox, sy_orbit=oy, sz_orbit=oz)
        if p.alpha < 1:
            data["sz_renormalized"] = adiabatic_renormalized_sz(t, p)
        pred = dynamo_predictions(p)
        report.update(
            W_flow=pred.W_flow,
            dE_dyn_half=pred.dE_dyn_half,
            C_dyn=pred.C_dyn,
            dE_dyn_topological=pred.dE_dyn_topological,
        )
        if 0 < p.alpha < 0.5:
            report["bethe_sx"] = bethe_sx(KondoParams(Delta=p.H, alpha=p.alpha, omega_c=p.omega_c))
    files: Files = []
    _write(out, "analytic.csv", "analytic", pd.DataFrame(data), files)
    return files, report, ()


DISPATCH: Dict[SolverKind, Callable[[ExperimentConfig, Path, int], Tuple[Files, Dict[str, Any], Tuple[str, ...]]]] = {
    SolverKind.ED: _run_ed,
    SolverKind.SSE: _run_sse,
    SolverKind.NIBA: _run_niba,
    SolverKind.GKLS: _run_gkls,
    SolverKind.ANALYTIC: _run_analytic,
}


def run_point(
    index: int, overrides: Dict[str, Any], cfg: ExperimentConfig, out_dir: Path, workers: int = 1
) -> PointResult:
    """Run one configuration into out_dir/point_<index>; failures are captured, not raised."""
    rel = Path(f"point_{index}")
    point_dir = out_dir / rel
    point_dir.mkdir(parents=True, exist_ok=True)
    try:
        files, report, flags = DISPATCH[cfg.solver](cfg, point_dir, workers)
        report.update(overrides=overrides, flags=list(flags))
        write_json(report, point_dir / "report.json")
        files.append(("report", "report.json"))
    except DynamoError as exc:
        logger.error("point %d failed: %s", index, exc)
        return PointResult(index, overrides, "failed", error=f"{type(exc).__name__}: {exc}")
    except Exception as exc:
        logger.exception("point %d failed unexpectedly", index)
        return PointResult(index, overrides, "failed", error=f"{type(exc).__name__}: {exc}")
    for flag in flags:
        logger.warning("point %d flagged: %s", index, flag)
    return PointResult(index, overrides, "ok", files=[(k, str(rel / name)) for k, name in files], flags=tuple(flags))


def _run_point_task(task: Tuple[int, Dict[str, Any], ExperimentConfig, Path]) -> PointResult:
    index, overrides, cfg, out_dir = task
    return run_point(index, overrides, cfg, out_dir, workers=1)


def default_out_dir(config: ExperimentConfig, digest: str) -> Path:
    label = config.preset or config.solver.value
    return settings.output_dir / f"{label}-{digest[:12]}"


def _register_start(registry: Optional[RegistryConfig], manifest: RunManifest, config: ExperimentConfig, n_points: int):
    if registry is None:
        return
    try:
        registry.create_tables()
        session = next(registry.get_session())
        try:
            run = RunCRUD.create(
                session,
                config_hash=manifest.config_hash,
                solver=config.solver.value,
                code_version=manifest.code_version,
                out_dir=str(manifest.out_dir),
                preset=config.preset,
                n_points=n_points,
            )
            manifest.run_id = run.id
        finally:
            session.close()
    except SQLAlchemyError as exc:
        logger.warning("run registry unavailable: %s", exc)


def _register_finish(registry: Optional[RegistryConfig], manifest: RunManifest) -> None:
    if registry is None or manifest.run_id is None:
        return
    outputs = []
    for pt in manifest.points:
        outputs.extend((pt.index, path, kind) for kind, path in pt.files)
    try:
        session = next(registry.get_session())
        try:
            RunCRUD.finish(session, manifest.run_id, manifest.status, manifest.n_failed, outputs)
        finally:
            session.close()
    except SQLAlchemyError as exc:
        logger.warning("could not close run %s in the registry: %s", manifest.run_id, exc)


def run(
    config: ExperimentConfig,
    out_dir: Optional[Union[str, Path]] = None,
    workers: Optional[int] = None,
    progress: bool = False,
    registry: Optional[RegistryConfig] = None,
) -> RunManifest:
    """Execute a configuration, fanning a sweep out over worker processes.

    Args:
        config: Validated experiment
        out_dir: Output directory (defaults to config.out_dir, then settings)
        workers: Worker processes (defaults to config.workers, then settings)
        progress: Show a progress bar over sweep points
        registry: Run registry to record the run in; None skips recording

    Returns:
        RunManifest: written to <out_dir>/manifest.json
    """
    digest = config_hash(config)
    out = Path(out_dir or config.out_dir or default_out_dir(config, digest))
    out.mkdir(parents=True, exist_ok=True)
    workers = workers or config.workers or settings.workers

    points = config.point_configs()
    manifest = RunManifest(
        config=config.canonical(),
        config_hash=digest,
        code_version=__version__,
        out_dir=out,
        started_at=_now(),
    )
    write_json(manifest.config, out / "config.json")
    _register_start(registry, manifest, config, len(points))
    logger.info("run %s: %d point(s) into %s", digest[:12], len(points), out)

    tasks = [(i, overrides, cfg, out) for i, (overrides, cfg) in enumerate(points)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            mapped = pool.map(_run_point_task, tasks)
            results = list(tqdm(mapped, total=len(tasks), disable=not progress, desc="points"))
    else:
        results = [
            run_point(i, overrides, cfg, out, workers=workers)
            for i, overrides, cfg, _ in tqdm(tasks, disable=not progress, desc="points")
        ]

    manifest.points = results
    manifest.finished_at = _now()
    manifest.write()
    _register_finish(registry, manifest)
    logger.info("run %s finished: %s (%d failed)", digest[:12], manifest.status, manifest.n_failed)
    return manifest


def rerun(
    manifest_path: Union[str, Path],
    out_dir: Optional[Union[str, Path]] = None,
    workers: Optional[int] = None,
    progress: bool = False,
    registry: Optional[RegistryConfig] = None,
) -> RunManifest:
    """Re-execute the configuration stored in a manifest (default output: <original>-rerun)."""
    manifest_path = Path(manifest_path)
    stored = read_json(manifest_path)
    config = ExperimentConfig.from_dict(stored["config"])
    target = Path(out_dir) if out_dir else manifest_path.parent.with_name(manifest_path.parent.name + "-rerun")
    return run(config, target, workers=workers, progress=progress, registry=registry)
