"""
Run repository for the results store.

This module provides the data access layer for experiment runs and their
curve points, keeping SQLAlchemy queries out of the services and commands.
"""

import json
import math
from typing import Iterable, Optional

from sqlalchemy import select
from sqlalchemy.orm import Session

from mppsim.models.run import CurvePointRecord, ExperimentRun
from mppsim.schemas.experiment import PerCurvePoint, RunManifest


def _nullable(value: float) -> Optional[float]:
    return None if math.isnan(value) else value


def create_run(db: Session, manifest: RunManifest) -> ExperimentRun:
    """
    Store a run from its manifest.

    Args:
        db: Database session
        manifest: Effective config, seed and versions

    Returns:
        The created ExperimentRun with its generated id

    Example:
        >>> run = create_run(db, build_manifest(cfg, "per_curve.csv"))
        >>> print(run.master_seed)
        0
    """
    run = ExperimentRun(
        config_digest=manifest.config_digest,
        master_seed=manifest.master_seed,
        config_json=json.dumps(manifest.config, sort_keys=True),
        versions_json=json.dumps(manifest.versions, sort_keys=True),
        curve_csv_path=manifest.curve_csv_path,
    )

    db.add(run)
    db.commit()
    db.refresh(run)

    return run


def add_curve_points(db: Session, run_id: str, points: Iterable[PerCurvePoint]) -> list[CurvePointRecord]:
    """
    Attach curve points to a stored run, in the given order.

    Failed points (``error`` set) are stored with null rates.
    """
    records = [
        CurvePointRecord(
            run_id=run_id,
            eb_nb_db=p.eb_nb_db,
            threshold_mode=p.threshold_mode.value,
            packets_sent=p.packets_sent,
            packets_ok=p.packets_ok,
            packets_dropped=p.packets_dropped,
            per=_nullable(p.per),
            hallucinations=p.hallucinations,
            ci_low=_nullable(p.ci_low),
            ci_high=_nullable(p.ci_high),
        )
        for p in points
    ]
    db.add_all(records)
    db.commit()
    return records


def get_run_by_id(db: Session, run_id: str) -> Optional[ExperimentRun]:
    """
    Retrieve a run by its ID.

    Returns:
        ExperimentRun if found, None otherwise
    """
    stmt = select(ExperimentRun).where(ExperimentRun.id == run_id)
    result = db.execute(stmt)
    return result.scalar_one_or_none()


def list_runs(db: Session, config_digest: Optional[str] = None) -> list[ExperimentRun]:
    """Runs, newest first, optionally restricted to one config."""
    stmt = select(ExperimentRun).order_by(ExperimentRun.created_at.desc())
    if config_digest is not None:
        stmt = stmt.where(ExperimentRun.config_digest == config_digest)
    return list(db.execute(stmt).scalars())


def get_curve_points(db: Session, run_id: str) -> list[CurvePointRecord]:
    stmt = select(CurvePointRecord).where(CurvePointRecord.run_id == run_id).order_by(CurvePointRecord.id)
    return list(db.execute(stmt).scalars())
