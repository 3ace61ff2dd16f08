"""CRUD operations for the run registry."""

from datetime import datetime
from typing import List, Optional, Sequence, Tuple

from sqlalchemy import select
from sqlalchemy.orm import Session

from quantum_dynamo.db.models import RunOutput, RunRecord


class RunCRUD:
    """CRUD operations for RunRecord."""

    @staticmethod
    def create(
        session: Session,
        config_hash: str,
        solver: str,
        code_version: str,
        out_dir: str,
        preset: Optional[str] = None,
        n_points: int = 1,
    ) -> RunRecord:
        """Register a run that has just started.

        Args:
            session: Registry session
            config_hash: SHA-256 of the canonical configuration
            solver: Solver name
            code_version: Package version
            out_dir: Output directory of the run
            preset: Preset name, if any
            n_points: Number of sweep points

        Returns:
            RunRecord: Created run
        """
        run = RunRecord(
            config_hash=config_hash,
            solver=solver,
            preset=preset,
            code_version=code_version,
            out_dir=out_dir,
            n_points=n_points,
        )
        session.add(run)
        session.commit()
        session.refresh(run)
        return run

    @staticmethod
    def get_by_id(session: Session, run_id: int) -> Optional[RunRecord]:
        return session.get(RunRecord, run_id)

    @staticmethod
    def get_by_hash(session: Session, config_hash: str) -> List[RunRecord]:
        """Get every run of one configuration, oldest first.

        Args:
            session: Registry session
            config_hash: Configuration hash

        Returns:
            List[RunRecord]: Matching runs
        """
        stmt = select(RunRecord).where(RunRecord.config_hash == config_hash).order_by(RunRecord.id)
        return list(session.execute(stmt).scalars().all())

    @staticmethod
    def get_all(session: Session, solver: Optional[str] = None) -> List[RunRecord]:
        """Get all runs, optionally filtered by solver."""
        stmt = select(RunRecord).order_by(RunRecord.id)
        if solver is not None:
            stmt = stmt.where(RunRecord.solver == solver)
        return list(session.execute(stmt).scalars().all())

    @staticmethod
    def finish(
        session: Session,
        run_id: int,
        status: str,
        n_failed: int,
        outputs: Sequence[Tuple[int, str, str]] = (),
    ) -> Optional[RunRecord]:
        """Close a run and attach its output files.

        Args:
            session: Registry session
            run_id: Run ID
            status: Final status ("ok", "partial" or "failed")
            n_failed: Number of failed sweep points
            outputs: (point_index, path, kind) per emitted file

        Returns:
            RunRecord: Updated run or None if not found
        """
        run = session.get(RunRecord, run_id)
        if run is None:
            return None
        run.status = status
        run.n_failed = n_failed
        run.finished_at = datetime.utcnow()
        for point_index, path, kind in outputs:
            run.outputs.append(RunOutput(point_index=point_index, path=path, kind=kind))
        session.commit()
        session.refresh(run)
        return run

    @staticmethod
    def delete(session: Session, run_id: int) -> bool:
        """Delete a run and its output rows.

        Returns:
            bool: True if deleted, False if not found
        """
        run = session.get(RunRecord, run_id)
        if run is None:
            return False
        session.delete(run)
        session.commit()
        return True
