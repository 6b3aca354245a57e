"""
YAML run configuration files.

A run file mirrors ``RunConfigFile``: nested sections for the codec, timing,
pulse shape, noise and thresholds, plus output paths. Every field is
optional, an empty file is a fully-defaulted run, and unknown keys are
rejected.
"""

from pathlib import Path
from typing import Any, Optional, Union

import yaml
from pydantic import ValidationError

from mppsim.exceptions import ConfigError
from mppsim.schemas.experiment import ExperimentConfig, RunConfigFile

PathLike = Union[str, Path]


def _problems(exc: ValidationError) -> list[str]:
    problems = []
    for error in exc.errors():
        location = ".".join(str(part) for part in error["loc"]) or "<root>"
        problems.append(f"{location}: {error['msg']}")
    return problems


def parse_run_config(data: Any, overrides: Optional[dict[str, Any]] = None, source: str = "<config>") -> RunConfigFile:
    """
    Validate a parsed YAML document.

    Args:
        data: Result of ``yaml.safe_load`` (None for an empty document)
        overrides: Top-level keys that replace the document's values
        source: Name used in error messages

    Raises:
        ConfigError: Listing every offending key
    """
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: a run file is a mapping of sections", [f"<root>: got {type(data).__name__}"])
    merged = {**data, **(overrides or {})}
    try:
        return RunConfigFile.model_validate(merged)
    except ValidationError as exc:
        raise ConfigError(f"{source}: invalid run configuration", _problems(exc)) from exc


def load_run_config(path: Optional[PathLike], overrides: Optional[dict[str, Any]] = None) -> RunConfigFile:
    """
    Load and validate a run file; ``None`` gives the defaults.

    Raises:
        ConfigError: If the file is unreadable, not YAML, or invalid
    """
    if path is None:
        return parse_run_config({}, overrides, "<defaults>")
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read run file", [str(exc)]) from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML", [str(exc)]) from exc
    return parse_run_config(data, overrides, str(path))


def dump_effective_config(cfg: ExperimentConfig, path: PathLike) -> Path:
    """Write the fully-resolved config; loading it back reproduces the run."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = yaml.safe_dump(cfg.model_dump(mode="json"), sort_keys=False, allow_unicode=True)
    path.write_text(text, encoding="utf-8")
    return path
