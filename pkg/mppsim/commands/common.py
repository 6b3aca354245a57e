"""
Helpers shared by every sub-command: global options, run-file loading,
codec flags and output routing.
"""

import argparse
import sys
from pathlib import Path
from typing import Optional

from pydantic import ValidationError

from mppsim.config import settings
from mppsim.exceptions import ParameterError
from mppsim.repositories.config_repository import load_run_config
from mppsim.schemas.codec import CodecParams
from mppsim.schemas.experiment import RunConfigFile
from mppsim.utils.seeding import MAX_SEED


def seed_value(text: str) -> int:
    """argparse type for ``--seed``: an integer in [0, MAX_SEED]."""
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed: {text!r}") from None
    if not 0 <= value <= MAX_SEED:
        raise argparse.ArgumentTypeError(f"seed must lie in [0, {MAX_SEED}], got {value}")
    return value


def global_options() -> argparse.ArgumentParser:
    """Parent parser carrying ``--seed``, ``--config`` and ``--out``."""
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--seed", type=seed_value, default=None,
                        help=f"master seed (default: config file, else {settings.default_seed})")
    parent.add_argument("--config", default=None, help="YAML run file (default: built-in defaults)")
    parent.add_argument("--out", default=None, help="output file (default: per command)")
    return parent


def add_codec_options(parser: argparse.ArgumentParser, defaults: CodecParams) -> None:
    group = parser.add_argument_group("codec")
    group.add_argument("--k", type=int, default=None, help=f"message bits (default {defaults.message_bits})")
    group.add_argument("--c", type=int, default=None, help=f"checksum bits (default {defaults.checksum_bits})")
    group.add_argument("--n", type=int, default=None, help=f"packet slots (default {defaults.packet_slots})")
    group.add_argument("--hash-seed", type=int, default=None, help=f"prefix hash seed (default {defaults.hash_seed})")
    parser.set_defaults(codec_defaults=defaults)


def load_config(args: argparse.Namespace) -> RunConfigFile:
    """Run file named by ``--config`` with ``--seed`` applied on top."""
    overrides = {} if args.seed is None else {"master_seed": args.seed}
    return load_run_config(args.config, overrides)


def codec_from_args(args: argparse.Namespace) -> CodecParams:
    """
    Codec flags, falling back to the run file's codec, then the command default.

    Raises:
        ParameterError: If the resulting parameters are invalid
    """
    base = load_config(args).codec if args.config else args.codec_defaults
    updates = {
        "message_bits": args.k,
        "checksum_bits": args.c,
        "packet_slots": args.n,
        "hash_seed": args.hash_seed,
    }
    data = base.model_dump()
    data.update({key: value for key, value in updates.items() if value is not None})
    try:
        return CodecParams(**data)
    except ValidationError as exc:
        raise ParameterError(f"invalid codec parameters: {exc.errors()[0]['msg']}") from exc


def resolve_output(path: str) -> Path:
    """Place relative default output paths under ``settings.output_dir``."""
    candidate = Path(path)
    return candidate if candidate.is_absolute() else Path(settings.output_dir) / candidate


def emit(args: argparse.Namespace, text: str) -> None:
    """Print to stdout, or write to ``--out`` when given."""
    if not text.endswith("\n"):
        text += "\n"
    if args.out:
        path = Path(args.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def seed_from_args(args: argparse.Namespace, fallback: Optional[int] = None) -> int:
    if args.seed is not None:
        return args.seed
    if args.config:
        return load_config(args).master_seed
    return settings.default_seed if fallback is None else fallback
