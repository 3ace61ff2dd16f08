from datetime import datetime
from typing import List, Optional

from sqlalchemy import DateTime, ForeignKey, Integer, String, Text
from sqlalchemy.orm import DeclarativeBase, Mapped, mapped_column, relationship


class Base(DeclarativeBase):
    """Base class for all registry models."""

    pass


class RunRecord(Base):
    """One invocation of the harness: a single point or a whole sweep."""

    __tablename__ = "runs"

    id: Mapped[int] = mapped_column(Integer, primary_key=True)
    config_hash: Mapped[str] = mapped_column(String(64), nullable=False, index=True)
    solver: Mapped[str] = mapped_column(String(20), nullable=False)
    preset: Mapped[Optional[str]] = mapped_column(String(50), nullable=True)
    code_version: Mapped[str] = mapped_column(String(20), nullable=False)
    status: Mapped[str] = mapped_column(String(20), nullable=False, default="running")
    n_points: Mapped[int] = mapped_column(Integer, nullable=False, default=1)
    n_failed: Mapped[int] = mapped_column(Integer, nullable=False, default=0)
    out_dir: Mapped[str] = mapped_column(Text, nullable=False)
    started_at: Mapped[datetime] = mapped_column(DateTime, nullable=False, default=datetime.utcnow)
    finished_at: Mapped[Optional[datetime]] = mapped_column(DateTime, nullable=True)

    # Relationships
    outputs: Mapped[List["RunOutput"]] = relationship(
        back_populates="run", cascade="all, delete-orphan"
    )

    def __repr__(self) -> str:
        return f"<RunRecord(id={self.id}, solver='{self.solver}', status='{self.status}')>"


class RunOutput(Base):
    """A file emitted by a run."""

    __tablename__ = "run_outputs"

    id: Mapped[int] = mapped_column(Integer, primary_key=True)
    run_id: Mapped[int] = mapped_column(ForeignKey("runs.id"), nullable=False)
    point_index: Mapped[int] = mapped_column(Integer, nullable=False)
    path: Mapped[str] = mapped_column(Text, nullable=False)
    kind: Mapped[str] = mapped_column(String(30), nullable=False)

    run: Mapped["RunRecord"] = relationship(back_populates="outputs")

    def __repr__(self) -> str:
        return f"<RunOutput(run_id={self.run_id}, point={self.point_index}, kind='{self.kind}')>"
