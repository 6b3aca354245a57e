# Data access layer - results store and files
from mppsim.repositories.run_repository import (
    create_run,
    add_curve_points,
    get_run_by_id,
    list_runs,
    get_curve_points,
)

__all__ = [
    "create_run",
    "add_curve_points",
    "get_run_by_id",
    "list_runs",
    "get_curve_points",
]
