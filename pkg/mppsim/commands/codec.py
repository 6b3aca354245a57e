"""
Codec sub-commands: encode, decode, hallucinate and cost-profile.
"""

import argparse
import io
import logging
import sys
from pathlib import Path

from mppsim.commands.common import add_codec_options, codec_from_args, emit, global_options, seed_from_args
from mppsim.exceptions import MppSimError, ParameterError
from mppsim.repositories.csv_repository import write_rows
from mppsim.schemas.codec import CodecParams, Message, Packet
from mppsim.services.codec_service import (
    BRUTE_FORCE_MAX_BITS,
    DEFAULT_DECODE_LIMIT,
    brute_force_decode,
    decode_all,
    encode,
)
from mppsim.services.experiment_service import decoder_cost_profile, hallucination_profile

logger = logging.getLogger(__name__)


def _unescape(text: str) -> str:
    """Turn shell-literal escapes such as ``\\n`` into characters."""
    return text.encode("latin-1", errors="backslashreplace").decode("unicode_escape")


def _read_hex(value: str) -> str:
    """A hex string, a file holding one, or ``-`` for standard input."""
    if value == "-":
        return sys.stdin.read().strip()
    path = Path(value)
    if path.is_file():
        return path.read_text(encoding="utf-8").strip()
    return value.strip()


def _parse_packet(value: str, params: CodecParams) -> Packet:
    try:
        return Packet.from_hex(_read_hex(value), params.packet_slots)
    except ValueError as exc:
        raise ParameterError(f"malformed packet hex: {exc}") from exc


def cmd_encode(args: argparse.Namespace) -> int:
    """
    Print the hex packet of one message.

    Exit status 0 on success; a malformed message or a length that does not
    match k is a parameter error (exit 1).
    """
    params = codec_from_args(args)
    try:
        if args.ascii is not None:
            message = Message.from_ascii(_unescape(args.ascii))
        else:
            message = Message.from_hex(args.hex, params.message_bits)
    except ValueError as exc:
        raise ParameterError(f"bad message: {exc}") from exc
    if message.length != params.message_bits:
        raise ParameterError(f"message has {message.length} bits, codec expects k={params.message_bits}")

    emit(args, encode(message, params).to_hex())
    return 0


def cmd_decode(args: argparse.Namespace) -> int:
    """Print every decodable message, one per line, in lexicographic order."""
    params = codec_from_args(args)
    if args.ascii_out and params.message_bits != 64:
        raise ParameterError("--ascii-out needs k = 64")
    sources = ([args.packet] if args.packet else []) + (args.union or [])
    if not sources:
        raise ParameterError("decode needs a packet or --union")

    packet = Packet.empty(params.packet_slots)
    for source in sources:
        packet = packet | _parse_packet(source, params)

    limit = 1 if args.first else args.limit
    report = decode_all(packet, params, limit=limit, ascii_only=args.ascii_only)
    if report.truncated:
        logger.warning("decode stopped at the limit of %d messages", limit)

    if args.verify:
        if params.message_bits > BRUTE_FORCE_MAX_BITS:
            raise ParameterError(f"--verify needs k <= {BRUTE_FORCE_MAX_BITS}")
        oracle = brute_force_decode(packet, params)
        if not report.truncated and report.messages != oracle:
            raise MppSimError("tree decode disagrees with the exhaustive oracle")

    lines = [m.to_ascii() if args.ascii_out else m.to_hex() for m in report.messages]
    if args.ascii_out:
        lines = [line.encode("unicode_escape").decode("ascii") for line in lines]
    text = "\n".join(lines)
    if text or args.out:
        emit(args, text)
    return 0


def cmd_hallucinate(args: argparse.Namespace) -> int:
    """CSV of measured vs estimated hallucination rate per density."""
    params = codec_from_args(args)
    rows = hallucination_profile(params, args.densities, args.trials, seed_from_args(args))
    stream = io.StringIO()
    write_rows(stream, ["density", "trials", "measured_rate", "independence_estimate"], rows)
    emit(args, stream.getvalue())
    return 0


def cmd_cost_profile(args: argparse.Namespace) -> int:
    """CSV of mean decoder node expansions per density."""
    params = codec_from_args(args)
    rows = decoder_cost_profile(params, args.densities, args.trials, seed_from_args(args), args.limit)
    stream = io.StringIO()
    write_rows(stream, ["density", "trials", "mean_node_expansions", "truncated_fraction"], rows)
    emit(args, stream.getvalue())
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    """Attach the codec commands to the main parser."""
    common = global_options()

    encode_parser = subparsers.add_parser(
        "encode", parents=[common], help="encode one message into a hex packet",
        description="Encode a message (8 ASCII characters or k bits of hex) and print the packet as hex.",
    )
    source = encode_parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--ascii", help='exactly 8 characters; escapes such as "\\n" are honoured')
    source.add_argument("--hex", help="ceil(k/4) hex digits")
    add_codec_options(encode_parser, CodecParams())
    encode_parser.set_defaults(handler=cmd_encode)

    decode_parser = subparsers.add_parser(
        "decode", parents=[common], help="decode every message in a hex packet",
        description="Decode a packet given as hex, a file holding hex, or - for stdin.",
    )
    decode_parser.add_argument("packet", nargs="?", help="packet hex, file, or -")
    decode_parser.add_argument("--union", nargs="+", metavar="HEX", help="OR these packets together first")
    decode_parser.add_argument("--first", action="store_true", help="print at most the first message")
    decode_parser.add_argument("--limit", type=int, default=DEFAULT_DECODE_LIMIT,
                               help=f"stop after this many messages (default {DEFAULT_DECODE_LIMIT})")
    decode_parser.add_argument("--ascii-out", action="store_true", help="print 64-bit messages as ASCII")
    decode_parser.add_argument("--ascii-only", action="store_true",
                               help="only accept messages whose bytes have a clear top bit")
    decode_parser.add_argument("--verify", action="store_true",
                               help=f"check against the exhaustive oracle (k <= {BRUTE_FORCE_MAX_BITS})")
    add_codec_options(decode_parser, CodecParams())
    decode_parser.set_defaults(handler=cmd_decode)

    halluc_parser = subparsers.add_parser(
        "hallucinate", parents=[common], help="hallucination rate of random packets",
        description="Monte Carlo count of valid decodes in random packets, beside 2^k d^(k+c).",
    )
    halluc_parser.add_argument("--densities", type=float, nargs="+", default=[0.0, 1.0 / 3.0, 0.5, 1.0],
                               help="mark densities (default 0 1/3 0.5 1)")
    halluc_parser.add_argument("--trials", type=int, default=1000, help="packets per density (default 1000)")
    add_codec_options(halluc_parser, CodecParams(message_bits=10, checksum_bits=5))
    halluc_parser.set_defaults(handler=cmd_hallucinate)

    cost_parser = subparsers.add_parser(
        "cost-profile", parents=[common], help="decoder work versus packet density",
        description="Mean DFS node expansions of an exhaustive decode of random packets.",
    )
    cost_parser.add_argument("--densities", type=float, nargs="+", default=[0.0, 0.33, 0.5, 0.7, 0.9],
                             help="mark densities (default 0 0.33 0.5 0.7 0.9)")
    cost_parser.add_argument("--trials", type=int, default=1000, help="packets per density (default 1000)")
    cost_parser.add_argument("--limit", type=int, default=DEFAULT_DECODE_LIMIT,
                             help=f"decode limit per packet (default {DEFAULT_DECODE_LIMIT})")
    add_codec_options(cost_parser, CodecParams(message_bits=20, checksum_bits=10))
    cost_parser.set_defaults(handler=cmd_cost_profile)
