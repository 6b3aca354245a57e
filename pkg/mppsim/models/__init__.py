# SQLAlchemy ORM models
from mppsim.models.run import CurvePointRecord, ExperimentRun

__all__ = ["ExperimentRun", "CurvePointRecord"]
