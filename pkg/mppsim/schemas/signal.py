"""
Pydantic schemas for pulse waveforms and slot timing.

Defaults reproduce the measured transmitter: a ringing pulse with ~50 V
positive and ~40 V negative peaks inside a 3.9 us slot, 256 slots per
packet and 8-packet messages separated by 50 ms pauses.
"""

import math
from typing import Annotated

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from mppsim.schemas.codec import Packet

MIN_SAMPLES_PER_SLOT = 16

PositiveFloat = Annotated[float, Field(gt=0)]


def sample_index(time_s: float, sample_rate_hz: float) -> int:
    """
    Snap an absolute time onto a whole sample index (floor).

    A small tolerance absorbs floating-point error so that products such as
    3.9e-6 * 4.1e7 land on the intended sample.
    """
    return int(math.floor(time_s * sample_rate_hz + 1e-6))


class PulseShape(BaseModel):
    """
    Parametric model of the transmitted pulse: a damped sinusoid whose
    negative lobes are rescaled separately.
    """

    positive_peak_volts: PositiveFloat = 50.0
    negative_peak_volts: PositiveFloat = 40.0
    ring_frequency_hz: PositiveFloat = 5.0e5
    decay_time_s: PositiveFloat = 1.2e-6
    duration_s: PositiveFloat = 3.9e-6

    model_config = ConfigDict(frozen=True, extra="forbid")

    @model_validator(mode="after")
    def check_duration(self) -> "PulseShape":
        if self.duration_s * self.ring_frequency_hz < 1.0 - 1e-9:
            raise ValueError("pulse duration must cover at least one ring period")
        return self


class SlotTiming(BaseModel):
    """Slot grid of the transmitter and the detector's sample clock."""

    slot_duration_s: PositiveFloat = 3.9e-6
    slots_per_packet: Annotated[int, Field(ge=2)] = 256
    sample_rate_hz: PositiveFloat = 4.1e7

    model_config = ConfigDict(frozen=True, extra="forbid")

    @model_validator(mode="after")
    def check_resolution(self) -> "SlotTiming":
        if self.slot_duration_s * self.sample_rate_hz < MIN_SAMPLES_PER_SLOT:
            raise ValueError(
                f"sample rate gives fewer than {MIN_SAMPLES_PER_SLOT} samples per slot"
            )
        return self

    @property
    def packet_duration_s(self) -> float:
        return self.slots_per_packet * self.slot_duration_s

    def slot_start(self, slot: int) -> int:
        """First sample of slot ``slot`` on the absolute grid."""
        return sample_index(slot * self.slot_duration_s, self.sample_rate_hz)

    def slot_boundaries(self, slots: int, offset_s: float = 0.0) -> np.ndarray:
        """Sample indices of the ``slots + 1`` boundaries starting at ``offset_s``."""
        times = offset_s + np.arange(slots + 1) * self.slot_duration_s
        return np.floor(times * self.sample_rate_hz + 1e-6).astype(np.int64)


class Waveform(BaseModel):
    """
    Uniformly sampled voltage sequence.

    Attributes:
        samples: Voltages (float64)
        sample_rate_hz: Samples per second
        origin_time_s: Absolute time of the first sample
    """

    samples: np.ndarray
    sample_rate_hz: PositiveFloat
    origin_time_s: float = 0.0

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("samples", mode="before")
    @classmethod
    def validate_samples(cls, v: object) -> np.ndarray:
        samples = np.asarray(v, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("a waveform is a non-empty 1-D sample sequence")
        if not np.all(np.isfinite(samples)):
            raise ValueError("waveform samples must be finite")
        return samples

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz

    def times(self) -> np.ndarray:
        return self.origin_time_s + np.arange(self.samples.size) / self.sample_rate_hz

    def rms(self) -> float:
        return float(np.sqrt(np.mean(self.samples ** 2)))


class TransmissionPlan(BaseModel):
    """
    A message of packets sent back to back, followed by a pause, repeated.

    Attributes:
        packets: Packets of one message, in send order
        inter_message_pause_s: Silence after each message
        repetitions: Number of times the message is sent
    """

    packets: list[Packet]
    inter_message_pause_s: Annotated[float, Field(ge=0)] = 0.050
    repetitions: Annotated[int, Field(ge=1)] = 1

    model_config = ConfigDict(frozen=True)

    @field_validator("packets")
    @classmethod
    def validate_packets(cls, v: list[Packet]) -> list[Packet]:
        if not v:
            raise ValueError("a transmission plan needs at least one packet")
        if len({p.n for p in v}) != 1:
            raise ValueError("all packets in a plan must have the same length")
        return v


class WaveformHeader(BaseModel):
    """Sidecar record of a raw binary waveform."""

    sample_rate_hz: PositiveFloat
    origin_time_s: float = 0.0
    count: Annotated[int, Field(ge=1)]
    sample_format: str = "float64-le"
