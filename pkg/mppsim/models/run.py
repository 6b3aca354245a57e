"""
Experiment run models for the results store.

An ``ExperimentRun`` records the effective config, seed and component
versions of one ``per-curve`` invocation; each ``CurvePointRecord`` is one
row of its curve CSV.
"""

from datetime import datetime
from typing import Optional
from uuid import uuid4

from sqlalchemy import BigInteger, DateTime, Float, ForeignKey, Index, Integer, String, Text
from sqlalchemy.orm import Mapped, mapped_column, relationship

from mppsim.database import Base


class ExperimentRun(Base):
    """
    One packet-error-rate run.

    Attributes:
        id: Unique identifier (UUID)
        created_at: When the run was stored
        config_digest: SHA-256 of the canonical effective config
        master_seed: Seed every sub-seed derives from
        config_json: Effective config as JSON
        versions_json: Component versions as JSON
        curve_csv_path: Where the curve CSV was written, if anywhere
    """

    __tablename__ = "experiment_runs"

    id: Mapped[str] = mapped_column(
        String(36),
        primary_key=True,
        default=lambda: str(uuid4()),
        nullable=False
    )

    created_at: Mapped[datetime] = mapped_column(
        DateTime,
        default=datetime.utcnow,
        nullable=False
    )

    config_digest: Mapped[str] = mapped_column(String(64), nullable=False)
    master_seed: Mapped[int] = mapped_column(BigInteger, nullable=False)
    config_json: Mapped[str] = mapped_column(Text, nullable=False)
    versions_json: Mapped[str] = mapped_column(Text, nullable=False)
    curve_csv_path: Mapped[Optional[str]] = mapped_column(String(1024), nullable=True)

    points: Mapped[list["CurvePointRecord"]] = relationship(
        back_populates="run",
        cascade="all, delete-orphan",
        order_by="CurvePointRecord.id",
    )

    __table_args__ = (
        Index("ix_experiment_runs_config_digest", "config_digest"),
    )

    def __repr__(self) -> str:
        return f"<ExperimentRun(id={self.id}, seed={self.master_seed}, digest={self.config_digest[:12]})>"


class CurvePointRecord(Base):
    """One (Eb/Nb, threshold mode) point of a run."""

    __tablename__ = "curve_points"

    id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)
    run_id: Mapped[str] = mapped_column(
        String(36),
        ForeignKey("experiment_runs.id", ondelete="CASCADE"),
        nullable=False
    )

    eb_nb_db: Mapped[float] = mapped_column(Float, nullable=False)
    threshold_mode: Mapped[str] = mapped_column(String(8), nullable=False)
    packets_sent: Mapped[int] = mapped_column(Integer, nullable=False)
    packets_ok: Mapped[int] = mapped_column(Integer, nullable=False)
    packets_dropped: Mapped[int] = mapped_column(Integer, nullable=False)
    per: Mapped[Optional[float]] = mapped_column(Float, nullable=True)
    hallucinations: Mapped[int] = mapped_column(Integer, nullable=False, default=0)
    ci_low: Mapped[Optional[float]] = mapped_column(Float, nullable=True)
    ci_high: Mapped[Optional[float]] = mapped_column(Float, nullable=True)

    run: Mapped[ExperimentRun] = relationship(back_populates="points")

    __table_args__ = (
        Index("ix_curve_points_run_id", "run_id"),
    )

    def __repr__(self) -> str:
        return f"<CurvePointRecord(run_id={self.run_id}, eb_nb_db={self.eb_nb_db}, mode={self.threshold_mode})>"
