"""
Incremental prefix hashing for concurrent-code mark placement.

Every prefix of a codeword is hashed, and the hash chooses where the
prefix's mark lands in the packet. The hash must be incremental: the state
after prefix ``p + b`` depends only on the state after ``p`` and the bit
``b``, which is what lets the decoder walk the prefix tree one bit at a time.

The default implementation is a fully specified 64-bit mixing function.
Any object satisfying ``PrefixHash`` can be substituted through the codec's
``hasher`` argument.
"""

from functools import lru_cache
from typing import Protocol

import numpy as np

from mppsim.exceptions import ParameterError

MASK64 = (1 << 64) - 1

INIT_CONSTANT = 0x243F6A8885A308D3
BIT_CONSTANTS = (0x9E3779B97F4A7C15, 0xC2B2AE3D27D4EB4F)
MULTIPLIER = 0xD6E8FEB86659FD93
ROTATION = 29

HashState = int


class PrefixHash(Protocol):
    """Pluggable incremental hash used by the codec."""

    def init(self, seed: int) -> HashState: ...

    def update(self, state: HashState, bit: int) -> HashState: ...


def rotate_left_64(value: int, amount: int) -> int:
    """Rotate a 64-bit value left by ``amount`` bits."""
    value &= MASK64
    return ((value << amount) | (value >> (64 - amount))) & MASK64


def hash_init(seed: int) -> HashState:
    """
    Start a hash chain.

    Args:
        seed: 64-bit hash seed (CodecParams.hash_seed)

    Returns:
        The seed mixed with the fixed initialization constant

    Example:
        >>> hex(hash_init(0))
        '0x243f6a8885a308d3'
    """
    return (seed & MASK64) ^ INIT_CONSTANT


@lru_cache(maxsize=1 << 18)
def hash_update(state: HashState, bit: int) -> HashState:
    """
    Extend a hash chain by one bit.

    The sliding-window decoder re-walks the same prefixes from the same root
    at every slot, so results are memoized.

    Args:
        state: Hash state after the current prefix
        bit: Next codeword bit, 0 or 1

    Returns:
        Hash state after the extended prefix

    Example:
        >>> hex(hash_update(hash_init(0), 0))
        '0x8929777656a1a195'
    """
    if bit not in (0, 1):
        raise ParameterError(f"hash bit must be 0 or 1, got {bit!r}")
    mixed = (state ^ BIT_CONSTANTS[bit]) * MULTIPLIER & MASK64
    return rotate_left_64(mixed, ROTATION)


def mark_index(state: HashState, n: int) -> int:
    """Map a hash state onto a slot index in ``[0, n)``."""
    return state % n


class StandInPrefixHash:
    """The default ``PrefixHash`` built from ``hash_init`` and ``hash_update``."""

    def init(self, seed: int) -> HashState:
        return hash_init(seed)

    def update(self, state: HashState, bit: int) -> HashState:
        return hash_update(state, bit)


default_hasher: PrefixHash = StandInPrefixHash()


def hash_update_array(states: np.ndarray, bits: np.ndarray) -> np.ndarray:
    """
    Vectorized ``hash_update`` over uint64 arrays.

    Used by the exhaustive decoder, which hashes every candidate message in
    lock step.
    """
    constants = np.where(bits.astype(bool), np.uint64(BIT_CONSTANTS[1]), np.uint64(BIT_CONSTANTS[0]))
    mixed = (states ^ constants) * np.uint64(MULTIPLIER)
    return (mixed << np.uint64(ROTATION)) | (mixed >> np.uint64(64 - ROTATION))
