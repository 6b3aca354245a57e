"""
Noise sub-commands: gen-noise and fit-noise.
"""

import argparse
import logging

from mppsim.commands.common import emit, global_options, resolve_output, seed_from_args
from mppsim.exceptions import ParameterError
from mppsim.repositories.csv_repository import read_noise_samples, write_waveform_binary, write_waveform_csv
from mppsim.schemas.noise import HarmonicNoiseConfig, ImpulseTrainConfig, MiddletonParams, NoiseConfig
from mppsim.schemas.signal import SlotTiming
from mppsim.services.noise_service import fit_middleton, noise_waveform

logger = logging.getLogger(__name__)

DEFAULT_NOISE_FILE = "noise.csv"


def noise_config_from_args(args: argparse.Namespace) -> NoiseConfig:
    """
    Raises:
        ParameterError: If no component is selected
    """
    trains = []
    if args.line_locked:
        trains.append(ImpulseTrainConfig.line_locked_preset())
    if args.burst:
        trains.append(ImpulseTrainConfig.asynchronous_preset())
    middleton = None
    if args.middleton is not None:
        a, gamma = args.middleton
        middleton = MiddletonParams(A=a, Gamma=gamma, sigma_total=args.sigma, terms=args.terms)
    cfg = NoiseConfig(
        middleton=middleton,
        harmonics=HarmonicNoiseConfig(total_peak_volts=args.harmonic_peak) if args.harmonics else None,
        impulse_trains=tuple(trains),
        awgn_rms_volts=args.awgn,
    )
    if cfg.is_silent:
        raise ParameterError("select at least one noise component")
    return cfg


def cmd_gen_noise(args: argparse.Namespace) -> int:
    """Write ``time_s,volts`` samples of the selected noise components."""
    cfg = noise_config_from_args(args)
    waveform = noise_waveform(cfg, args.duration, args.sample_rate, seed_from_args(args))
    path = args.out or str(resolve_output(DEFAULT_NOISE_FILE))
    if args.binary:
        write_waveform_binary(waveform, path)
    else:
        write_waveform_csv(waveform, path)
    logger.info("wrote %d noise samples to %s", len(waveform), path)
    return 0


def cmd_fit_noise(args: argparse.Namespace) -> int:
    """Print ``A=... Gamma=... residual=...`` for the samples in a CSV."""
    samples = read_noise_samples(args.samples)
    fit = fit_middleton(samples, terms=args.terms)
    emit(args, fit.summary())
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    """Attach the noise commands to the main parser."""
    common = global_options()

    gen_parser = subparsers.add_parser(
        "gen-noise", parents=[common], help="generate channel noise samples",
        description="Generate the selected noise components and write them as time_s,volts CSV.",
    )
    gen_parser.add_argument("--harmonics", action="store_true", help="60 Hz harmonics 3..16")
    gen_parser.add_argument("--harmonic-peak", type=float, default=1.6, help="harmonic peak volts (default 1.6)")
    gen_parser.add_argument("--line-locked", action="store_true", help="7 kHz 1 us 2.2 V line-locked impulses")
    gen_parser.add_argument("--burst", action="store_true",
                            help="10 kHz 0.5 us 3.2 V impulses in 11 ms bursts with 25 ms gaps")
    gen_parser.add_argument("--middleton", type=float, nargs=2, metavar=("A", "GAMMA"),
                            help="Middleton Class A noise with these parameters")
    gen_parser.add_argument("--sigma", type=float, default=1.0, help="Class A total rms volts (default 1.0)")
    gen_parser.add_argument("--terms", type=int, default=3, help="Class A terms (default 3)")
    gen_parser.add_argument("--awgn", type=float, default=0.0, help="white Gaussian rms volts (default 0)")
    gen_parser.add_argument("--duration", type=float, default=0.05, help="seconds (default 0.05)")
    gen_parser.add_argument("--sample-rate", type=float, default=SlotTiming().sample_rate_hz,
                            help="samples per second (default 4.1e7)")
    gen_parser.add_argument("--binary", action="store_true", help="write raw float64 plus a JSON sidecar")
    gen_parser.set_defaults(handler=cmd_gen_noise)

    fit_parser = subparsers.add_parser(
        "fit-noise", parents=[common], help="fit Middleton Class A parameters",
        description="Fit A and Gamma to noise samples (last CSV column, at least 10^4 rows).",
    )
    fit_parser.add_argument("samples", help="CSV of samples with a header row")
    fit_parser.add_argument("--terms", type=int, default=3,
                            help="Class A terms (default 3; use 40 or more for near-Gaussian noise)")
    fit_parser.set_defaults(handler=cmd_fit_noise)
