"""
Experiment sub-commands: per-curve and calibrate.
"""

import argparse
import logging
from pathlib import Path
from typing import Any

from mppsim.commands.common import emit, global_options, resolve_output
from mppsim.config import settings
from mppsim.database import get_db, init_db
from mppsim.exceptions import CalibrationError
from mppsim.repositories.config_repository import dump_effective_config, load_run_config
from mppsim.repositories.csv_repository import read_reference_csv, write_curve_csv, write_json, write_sweep_csv
from mppsim.repositories.run_repository import add_curve_points, create_run
from mppsim.schemas.detector import ThresholdMode
from mppsim.schemas.experiment import EbNbConvention, RunConfigFile
from mppsim.services.experiment_service import (
    build_manifest,
    calibrate_for_point,
    format_summary,
    measure_noise_rms,
    run_per_curve,
    signal_gain_for,
)

logger = logging.getLogger(__name__)


def _load(args: argparse.Namespace, **extra: Any) -> RunConfigFile:
    overrides = {"master_seed": args.seed, **extra}
    return load_run_config(args.config, {key: value for key, value in overrides.items() if value is not None})


def manifest_path_for(cfg: RunConfigFile, curve_path: Path) -> Path:
    """``output.manifest_json`` if set, else ``<curve stem>.manifest.json`` beside the curve."""
    if cfg.output.manifest_json:
        return resolve_output(cfg.output.manifest_json)
    return curve_path.with_name(f"{curve_path.stem}.manifest.json")


def cmd_per_curve(args: argparse.Namespace) -> int:
    """
    Run the Eb/Nb sweep, write the curve CSV and manifest, print a summary.

    Exit status 2 when any point failed; its row is still written with the
    error text.
    """
    cfg = _load(args, repetitions=args.repetitions, eb_nb_convention=args.db_convention)
    if args.dump_config:
        dump_effective_config(cfg, args.dump_config)
        logger.info("effective config written to %s", args.dump_config)

    points = run_per_curve(cfg)

    curve_path = Path(args.out) if args.out else resolve_output(cfg.output.curve_csv)
    write_curve_csv(points, curve_path)
    manifest = build_manifest(cfg, str(curve_path))
    write_json(manifest, manifest_path_for(cfg, curve_path))
    logger.info("curve written to %s", curve_path)

    if args.persist or settings.persist_runs:
        init_db()
        with get_db() as db:
            run = create_run(db, manifest)
            add_curve_points(db, run.id, points)
            logger.info("run %s stored in the results store", run.id)

    reference = read_reference_csv(cfg.reference_csv) if cfg.reference_csv else []
    print(format_summary(points, reference))

    failed = [p for p in points if p.error is not None]
    if failed:
        logger.error("%d of %d points failed", len(failed), len(points))
        return 2
    return 0


def cmd_calibrate(args: argparse.Namespace) -> int:
    """
    Sweep thresholds at one Eb/Nb and print the pair.

    The sweep log is written even when calibration fails.
    """
    cfg = _load(args)
    mode = ThresholdMode(args.mode) if args.mode else cfg.modes[0]
    if args.snr is None:
        snr_db, point_index = cfg.snr_grid_db[-1], len(cfg.snr_grid_db) - 1
    else:
        snr_db = args.snr
        point_index = cfg.snr_grid_db.index(snr_db) if snr_db in cfg.snr_grid_db else 0

    gain = signal_gain_for(cfg, snr_db, measure_noise_rms(cfg))
    sweep_path = Path(args.sweep_log) if args.sweep_log else resolve_output(cfg.output.sweep_log_csv)
    try:
        result = calibrate_for_point(cfg, mode, gain, point_index)
    except CalibrationError as exc:
        write_sweep_csv(exc.sweep_log, sweep_path)
        logger.info("sweep log written to %s", sweep_path)
        raise

    write_sweep_csv(result.sweep_log, sweep_path)
    logger.info("sweep log written to %s", sweep_path)
    emit(args, result.thresholds.describe())
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    """Attach the experiment commands to the main parser."""
    common = global_options()

    curve_parser = subparsers.add_parser(
        "per-curve", parents=[common], help="packet error rate versus Eb/Nb",
        description="Run the configured Eb/Nb sweep and write the curve CSV plus a run manifest.",
    )
    curve_parser.add_argument("--repetitions", type=int, default=None,
                              help=f"messages per point (default: config, else {settings.desk_repetitions})")
    curve_parser.add_argument("--db-convention", choices=[c.value for c in EbNbConvention], default=None,
                              help="Eb/Nb decibel convention (default: config, else 20log)")
    curve_parser.add_argument("--dump-config", metavar="PATH", default=None,
                              help="also write the effective config to PATH")
    curve_parser.add_argument("--persist", action="store_true",
                              help="store the run in the results store (also MPPSIM_PERSIST_RUNS)")
    curve_parser.set_defaults(handler=cmd_per_curve)

    cal_parser = subparsers.add_parser(
        "calibrate", parents=[common], help="empirical threshold sweep",
        description="Lower the upper threshold (then raise the lower one) in steps of 100 counts "
                    "until gibberish appears, and print the resulting pair.",
    )
    cal_parser.add_argument("--mode", choices=[m.value for m in ThresholdMode], default=None,
                            help="threshold mode (default: first configured mode)")
    cal_parser.add_argument("--snr", type=float, default=None,
                            help="Eb/Nb in dB to calibrate at (default: last grid point)")
    cal_parser.add_argument("--sweep-log", default=None,
                            help="sweep log CSV (default: output.sweep_log_csv)")
    cal_parser.set_defaults(handler=cmd_calibrate)
