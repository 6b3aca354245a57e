"""
Error types shared by every layer of the simulator.

Services raise these; the command layer maps them onto exit codes
(1 for usage/config/parameter problems, 2 for runtime failures).
"""

from typing import Any


class MppSimError(Exception):
    """Base class for all simulator errors."""

    exit_code: int = 2


class ParameterError(MppSimError, ValueError):
    """Invalid parameters, lengths or formats."""

    exit_code = 1


class ConfigError(MppSimError):
    """
    A run configuration file failed validation.

    Attributes:
        problems: One human-readable entry per offending key
    """

    exit_code = 1

    def __init__(self, message: str, problems: list[str] | None = None) -> None:
        super().__init__(message)
        self.problems = problems or []

    def __str__(self) -> str:
        if not self.problems:
            return super().__str__()
        return super().__str__() + "\n" + "\n".join(f"  - {p}" for p in self.problems)


class MeasurementError(MppSimError):
    """A pulse could not be located in a measured trace."""


class CalibrationError(MppSimError):
    """
    Threshold calibration never produced a valid decode.

    Attributes:
        sweep_log: The probe steps taken before giving up
    """

    def __init__(self, message: str, sweep_log: list[Any]) -> None:
        super().__init__(message)
        self.sweep_log = sweep_log
