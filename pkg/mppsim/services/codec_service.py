"""
Concurrent-code encoder and prefix-tree decoder.

A codeword (message plus zero checksum) places one mark per prefix, at the
slot chosen by the prefix's hash. Decoding walks the prefix tree depth
first, keeping only prefixes whose mark is present, so every extra mark can
only add decodes while every missing mark kills the message that needed it.
"""

import logging
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np

from mppsim.exceptions import ParameterError
from mppsim.schemas.codec import CodecParams, Codeword, DecodeReport, Message, Packet
from mppsim.utils.prefix_hash import (
    PrefixHash,
    default_hasher,
    hash_init,
    hash_update_array,
)
from mppsim.utils.seeding import rng_for

logger = logging.getLogger(__name__)

DEFAULT_DECODE_LIMIT = 1024
BRUTE_FORCE_MAX_BITS = 20

Marks = Union[bytes, bytearray, memoryview, Sequence[int]]


def _check_message(message: Message, params: CodecParams) -> None:
    if message.length != params.message_bits:
        raise ParameterError(
            f"message has {message.length} bits, codec expects k={params.message_bits}"
        )


def _check_packet(packet: Packet, params: CodecParams) -> None:
    if packet.n != params.packet_slots:
        raise ParameterError(
            f"packet has {packet.n} slots, codec expects n={params.packet_slots}"
        )


def append_checksum(message: Message, params: CodecParams) -> Codeword:
    """
    Concatenate the c-bit all-zero checksum to a message.

    Raises:
        ParameterError: If the message length is not k

    Example:
        >>> p = CodecParams(message_bits=4, checksum_bits=2, packet_slots=24)
        >>> append_checksum(Message.from_bits("1011"), p).bits
        (1, 0, 1, 1, 0, 0)
    """
    _check_message(message, params)
    return Codeword(bits=message.bits + (0,) * params.checksum_bits)


def encode(
    message: Message,
    params: CodecParams,
    hasher: PrefixHash = default_hasher,
) -> Packet:
    """
    Encode one message into a packet of marks.

    For each prefix of the codeword the slot ``hash(prefix) mod n`` is
    marked. Colliding prefixes share a mark, so popcount <= k + c.

    Raises:
        ParameterError: If k + c > n or the message length is not k
    """
    if not params.fits:
        raise ParameterError(
            f"k + c = {params.codeword_bits} exceeds n = {params.packet_slots}"
        )
    codeword = append_checksum(message, params)

    n = params.packet_slots
    marks = bytearray(n)
    state = hasher.init(params.hash_seed)
    for bit in codeword.bits:
        state = hasher.update(state, bit)
        marks[state % n] = 1
    return Packet(marks=bytes(marks))


@lru_cache(maxsize=64)
def forced_zero_depths(params: CodecParams, ascii_only: bool = False) -> tuple[bool, ...]:
    """
    Per codeword position, whether the decoder may only extend with 0.

    Checksum positions are always forced. With ``ascii_only`` the most
    significant bit of every message byte is forced too.
    """
    if ascii_only and params.message_bits % 8:
        raise ParameterError("ascii_only decoding needs k to be a multiple of 8")
    k = params.message_bits
    return tuple(
        depth >= k or (ascii_only and depth % 8 == 0)
        for depth in range(params.codeword_bits)
    )


def search_marks(
    marks: Marks,
    params: CodecParams,
    limit: int,
    hasher: PrefixHash = default_hasher,
    ascii_only: bool = False,
) -> tuple[list[int], int, bool]:
    """
    Depth-first prefix-tree search over a raw mark buffer.

    This is the hot loop shared by ``decode_all``/``decode_first`` and the
    sliding-window detector, which hands in slices of its decision buffer
    without building ``Packet`` objects.

    Returns:
        (message values in ascending order, node expansions, truncated)
    """
    n = len(marks)
    total = params.codeword_bits
    shift = params.checksum_bits
    forced = forced_zero_depths(params, ascii_only)
    update = hasher.update

    found: list[int] = []
    expansions = 0
    stack = [(0, hasher.init(params.hash_seed), 0)]
    while stack:
        depth, state, value = stack.pop()
        if depth == total:
            found.append(value >> shift)
            if len(found) >= limit:
                return found, expansions, bool(stack)
            continue
        # push 1 before 0 so the 0 branch is explored first
        for bit in ((0,) if forced[depth] else (1, 0)):
            expansions += 1
            child = update(state, bit)
            if marks[child % n]:
                stack.append((depth + 1, child, (value << 1) | bit))
    return found, expansions, False


def decode_all(
    packet: Packet,
    params: CodecParams,
    limit: int = DEFAULT_DECODE_LIMIT,
    hasher: PrefixHash = default_hasher,
    ascii_only: bool = False,
) -> DecodeReport:
    """
    Decode every valid message in a packet, in lexicographic order.

    Args:
        packet: Received marks
        params: Codec parameters
        limit: Stop after this many messages (sets ``truncated``)
        hasher: Prefix hash implementation
        ascii_only: Force the top bit of every message byte to 0

    Raises:
        ParameterError: If the packet length is not n or limit < 1
    """
    _check_packet(packet, params)
    if limit < 1:
        raise ParameterError("decode limit must be at least 1")

    values, expansions, truncated = search_marks(
        packet.marks, params, limit, hasher, ascii_only
    )
    k = params.message_bits
    return DecodeReport(
        messages=[Message(value=v, length=k) for v in values],
        node_expansions=expansions,
        truncated=truncated,
    )


def decode_first(
    packet: Packet,
    params: CodecParams,
    hasher: PrefixHash = default_hasher,
    ascii_only: bool = False,
) -> Optional[Message]:
    """Return the lexicographically smallest valid message, or None."""
    report = decode_all(packet, params, limit=1, hasher=hasher, ascii_only=ascii_only)
    return report.messages[0] if report.messages else None


def brute_force_decode(packet: Packet, params: CodecParams) -> list[Message]:
    """
    Test every one of the 2^k messages against the packet.

    A message is valid when every one of its prefix marks is present. This
    is independent of the tree search and serves as its oracle. Only the
    default stand-in hash is supported.

    Raises:
        ParameterError: If k exceeds 20 bits or the packet length is not n
    """
    _check_packet(packet, params)
    k = params.message_bits
    if k > BRUTE_FORCE_MAX_BITS:
        raise ParameterError(f"brute-force decoding is limited to k <= {BRUTE_FORCE_MAX_BITS}")

    n = np.uint64(params.packet_slots)
    marks = np.frombuffer(packet.marks, dtype=np.uint8).astype(bool)
    values = np.arange(1 << k, dtype=np.uint64)
    states = np.full(values.shape, hash_init(params.hash_seed), dtype=np.uint64)
    alive = np.ones(values.shape, dtype=bool)
    zeros = np.zeros(values.shape, dtype=np.uint64)
    for depth in range(params.codeword_bits):
        if depth < k:
            bits = (values >> np.uint64(k - 1 - depth)) & np.uint64(1)
        else:
            bits = zeros
        states = hash_update_array(states, bits)
        alive &= marks[(states % n).astype(np.intp)]
    return [Message(value=int(v), length=k) for v in values[alive]]


def packet_density(packet: Packet) -> float:
    """Fraction of slots that carry a mark."""
    return packet.popcount / packet.n


def random_marks(n: int, density: float, rng: np.random.Generator) -> bytes:
    """Independent Bernoulli(density) marks as a raw decoder buffer."""
    return (rng.random(n) < density).astype(np.uint8).tobytes()


def hallucination_rate(
    density: float,
    params: CodecParams,
    trials: int,
    rng_seed: int,
    limit: Optional[int] = None,
) -> float:
    """
    Estimate the mean number of valid decodes in random packets.

    Each trial draws marks independently with probability ``density`` and
    counts every decodable message. Trial t uses the sub-seed
    ``derive_seed(rng_seed, t)``.

    Args:
        density: Mark probability per slot
        params: Codec parameters
        trials: Number of random packets
        rng_seed: Master seed
        limit: Decode limit per trial (defaults to 2^k for k <= 24)

    Returns:
        Mean decoded messages per packet
    """
    if not 0.0 <= density <= 1.0:
        raise ParameterError(f"density must lie in [0, 1], got {density}")
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    if limit is None:
        limit = 1 << params.message_bits if params.message_bits <= 24 else DEFAULT_DECODE_LIMIT

    total = 0
    for trial in range(trials):
        marks = random_marks(params.packet_slots, density, rng_for(rng_seed, trial))
        values, _, _ = search_marks(marks, params, limit)
        total += len(values)

    rate = total / trials
    logger.debug("hallucination rate at density %.3f over %d trials: %.4g", density, trials, rate)
    return rate


def independence_estimate(density: float, params: CodecParams) -> float:
    """Analytic approximation 2^k * d^(k+c) of the hallucination rate."""
    return 2.0 ** params.message_bits * density ** params.codeword_bits
