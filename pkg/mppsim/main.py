"""
Command-line entry point.

This module builds the argument parser, configures logging, and registers
every command group. Data goes to stdout, diagnostics to stderr.
"""

import argparse
import logging
import sys
from typing import NoReturn, Optional, Sequence

from pydantic import ValidationError

from mppsim import __version__
from mppsim.commands import COMMAND_GROUPS
from mppsim.config import settings
from mppsim.exceptions import MppSimError

logger = logging.getLogger("mppsim")

USAGE_EXIT_CODE = 1
RUNTIME_EXIT_CODE = 2


class CommandParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit 1 instead of 2."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT_CODE, f"{self.prog}: error: {message}\n")


def configure_logging(level: str) -> None:
    logging.basicConfig(
        level=level.upper(),
        format="%(asctime)s - %(levelname)s - %(name)s - %(message)s",
        stream=sys.stderr,
    )


def build_parser() -> CommandParser:
    parser = CommandParser(
        prog="mppsim",
        description="Simulate a BBC-coded multiple pulse position link over a noisy power line.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=settings.log_level,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                        type=str.upper, help=f"diagnostic verbosity (default {settings.log_level})")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=CommandParser)
    subparsers.required = True
    for group in COMMAND_GROUPS:
        group.register(subparsers)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one sub-command and return its exit status.

    0 on success, 1 for usage, config and parameter errors, 2 for runtime
    failures such as a calibration that never decodes.
    """
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    try:
        return args.handler(args)
    except MppSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT_CODE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_EXIT_CODE


if __name__ == "__main__":
    sys.exit(main())
