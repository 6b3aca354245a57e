"""
Pydantic schemas for the concurrent-code codec.

This module defines codec parameters, messages, codewords, packets and
decode reports, including their text encodings (hexadecimal and 8-byte
ASCII).
"""

from functools import total_ordering
from typing import Annotated

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class CodecParams(BaseModel):
    """
    Parameters governing all encode/decode arithmetic.

    Attributes:
        message_bits: k, information bits per message
        checksum_bits: c, trailing zero bits appended before encoding
        packet_slots: n, slots (marks) per packet
        hash_seed: 64-bit seed of the prefix hash
    """

    message_bits: Annotated[int, Field(ge=1, description="k")] = 64
    checksum_bits: Annotated[int, Field(ge=0, description="c")] = 13
    packet_slots: Annotated[int, Field(ge=2, description="n")] = 256
    hash_seed: Annotated[int, Field(ge=0, lt=1 << 64)] = 0

    model_config = ConfigDict(frozen=True, extra="forbid")

    @property
    def k(self) -> int:
        return self.message_bits

    @property
    def c(self) -> int:
        return self.checksum_bits

    @property
    def n(self) -> int:
        return self.packet_slots

    @property
    def codeword_bits(self) -> int:
        return self.message_bits + self.checksum_bits

    @property
    def fits(self) -> bool:
        """True when k + c <= n, i.e. an encoded packet can stay below full density."""
        return self.codeword_bits <= self.packet_slots


@total_ordering
class Message(BaseModel):
    """
    A k-bit message, stored as an unsigned integer (bit 0 of the message is
    the most significant bit of ``value``).

    Messages of equal length compare lexicographically on their bits,
    which is numeric order on ``value``.
    """

    value: Annotated[int, Field(ge=0)]
    length: Annotated[int, Field(ge=1)]

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_value_fits(self) -> "Message":
        if self.value >> self.length:
            raise ValueError(f"value does not fit in {self.length} bits")
        return self

    def __lt__(self, other: "Message") -> bool:
        if not isinstance(other, Message):
            return NotImplemented
        return (self.length, self.value) < (other.length, other.value)

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((self.value >> (self.length - 1 - i)) & 1 for i in range(self.length))

    @classmethod
    def from_bits(cls, bits: "list[int] | tuple[int, ...] | str") -> "Message":
        if isinstance(bits, str):
            bits = [int(ch) for ch in bits]
        if not bits:
            raise ValueError("a message needs at least one bit")
        value = 0
        for bit in bits:
            if bit not in (0, 1):
                raise ValueError(f"bits must be 0 or 1, got {bit!r}")
            value = (value << 1) | bit
        return cls(value=value, length=len(bits))

    @classmethod
    def from_hex(cls, text: str, length: int) -> "Message":
        digits = text.strip().lower().removeprefix("0x")
        if len(digits) != -(-length // 4):
            raise ValueError(f"expected {-(-length // 4)} hex digits for {length} bits, got {len(digits)}")
        value = int(digits, 16)
        pad = 4 * len(digits) - length
        if value & ((1 << pad) - 1):
            raise ValueError("trailing pad bits must be zero")
        return cls(value=value >> pad, length=length)

    @classmethod
    def from_ascii(cls, text: str) -> "Message":
        """Build a 64-bit message from exactly 8 ASCII characters."""
        raw = text.encode("ascii")
        if len(raw) != 8:
            raise ValueError(f"ASCII messages are exactly 8 characters, got {len(raw)}")
        return cls(value=int.from_bytes(raw, "big"), length=64)

    def to_hex(self) -> str:
        digits = -(-self.length // 4)
        pad = 4 * digits - self.length
        return format(self.value << pad, f"0{digits}x")

    def to_ascii(self) -> str:
        if self.length != 64:
            raise ValueError("ASCII rendering needs a 64-bit message")
        return self.value.to_bytes(8, "big").decode("latin-1")

    def is_ascii(self) -> bool:
        """True when every byte has its most significant bit clear."""
        if self.length % 8:
            return False
        return all(not (self.value >> (self.length - 8 * (i + 1) + 7)) & 1 for i in range(self.length // 8))


class Codeword(BaseModel):
    """Message bits followed by c zero checksum bits."""

    bits: tuple[int, ...]

    model_config = ConfigDict(frozen=True)

    @field_validator("bits")
    @classmethod
    def validate_bits(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        if any(bit not in (0, 1) for bit in v):
            raise ValueError("codeword bits must be 0 or 1")
        return v


class Packet(BaseModel):
    """
    A fixed-length vector of slot marks (1 = pulse present).

    ``marks`` holds one byte per slot, each 0 or 1, so slices of it can be
    handed straight to the decoder.
    """

    marks: bytes

    model_config = ConfigDict(frozen=True)

    @field_validator("marks")
    @classmethod
    def validate_marks(cls, v: bytes) -> bytes:
        if not v:
            raise ValueError("a packet has at least one slot")
        if v.translate(None, b"\x00\x01"):
            raise ValueError("marks must be 0 or 1")
        return v

    @classmethod
    def empty(cls, n: int) -> "Packet":
        return cls(marks=bytes(n))

    @classmethod
    def full(cls, n: int) -> "Packet":
        return cls(marks=b"\x01" * n)

    @classmethod
    def from_indices(cls, n: int, indices: "set[int] | list[int]") -> "Packet":
        marks = bytearray(n)
        for index in indices:
            marks[index] = 1
        return cls(marks=bytes(marks))

    @classmethod
    def from_hex(cls, text: str, n: int) -> "Packet":
        """Parse ceil(n/4) hex digits; slot 0 is the most significant bit."""
        digits = text.strip().lower()
        if len(digits) != -(-n // 4):
            raise ValueError(f"expected {-(-n // 4)} hex digits for {n} slots, got {len(digits)}")
        value = int(digits, 16)
        width = 4 * len(digits)
        marks = bytes((value >> (width - 1 - i)) & 1 for i in range(n))
        if value & ((1 << (width - n)) - 1):
            raise ValueError("trailing pad bits must be zero")
        return cls(marks=marks)

    @property
    def n(self) -> int:
        return len(self.marks)

    @property
    def popcount(self) -> int:
        return self.marks.count(1)

    @property
    def indices(self) -> set[int]:
        return {i for i, mark in enumerate(self.marks) if mark}

    def to_hex(self) -> str:
        digits = -(-self.n // 4)
        value = 0
        for mark in self.marks:
            value = (value << 1) | mark
        value <<= 4 * digits - self.n
        return format(value, f"0{digits}x")

    def __or__(self, other: "Packet") -> "Packet":
        if other.n != self.n:
            raise ValueError("packets must have equal length to be combined")
        return Packet(marks=bytes(a | b for a, b in zip(self.marks, other.marks)))

    def with_slot(self, index: int, mark: int) -> "Packet":
        marks = bytearray(self.marks)
        marks[index] = mark
        return Packet(marks=bytes(marks))


class DecodeReport(BaseModel):
    """
    Result of an exhaustive decode.

    Attributes:
        messages: Valid messages, strictly ascending
        node_expansions: Prefix extensions attempted by the search
        truncated: True when the result limit stopped the search
    """

    messages: list[Message]
    node_expansions: int
    truncated: bool = False
