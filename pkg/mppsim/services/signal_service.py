"""
Pulse synthesis and pulse-position modulation.

Packets become voltage waveforms by placing one synthesized pulse at the
start of every marked slot. Slot and segment boundaries are snapped to whole
samples on an absolute grid, so long transmissions never drift.
"""

import logging
import math
from functools import lru_cache
from typing import Sequence

import numpy as np

from mppsim.exceptions import ParameterError
from mppsim.schemas.codec import CodecParams, Packet
from mppsim.schemas.signal import (
    MIN_SAMPLES_PER_SLOT,
    PulseShape,
    SlotTiming,
    TransmissionPlan,
    Waveform,
    sample_index,
)

logger = logging.getLogger(__name__)


@lru_cache(maxsize=32)
def _pulse_samples(shape: PulseShape, sample_rate_hz: float) -> np.ndarray:
    count = sample_index(shape.duration_s, sample_rate_hz)
    t = np.arange(count) / sample_rate_hz
    raw = np.sin(2.0 * math.pi * shape.ring_frequency_hz * t) * np.exp(-t / shape.decay_time_s)

    volts = raw * (shape.positive_peak_volts / raw.max())
    negative = volts < 0
    volts[negative] *= shape.negative_peak_volts / -volts.min()
    volts.setflags(write=False)
    return volts


def synthesize_pulse(shape: PulseShape, sample_rate_hz: float) -> Waveform:
    """
    Sample one pulse: v(t) = A sin(2 pi f t) exp(-t / tau) on [0, duration).

    A is chosen so the largest sample equals +positive_peak_volts; negative
    samples are then rescaled by one factor so the smallest equals
    -negative_peak_volts. v(0) = 0.

    Raises:
        ParameterError: If the pulse would get fewer than 16 samples
    """
    if shape.duration_s * sample_rate_hz < MIN_SAMPLES_PER_SLOT:
        raise ParameterError(
            f"sample rate {sample_rate_hz:g} Hz undersamples a {shape.duration_s:g} s pulse"
        )
    return Waveform(samples=_pulse_samples(shape, sample_rate_hz).copy(), sample_rate_hz=sample_rate_hz)


def modulate_slots(
    marks: Sequence[int],
    timing: SlotTiming,
    shape: PulseShape,
    origin_time_s: float = 0.0,
) -> Waveform:
    """
    Modulate a run of consecutive slots (one or more packets back to back).

    Slot i starts at sample floor(i * slot_duration * sample_rate) relative
    to the first slot, and a pulse is written there when ``marks[i]`` is 1.

    Raises:
        ParameterError: If the pulse is longer than a slot
    """
    if shape.duration_s > timing.slot_duration_s * (1 + 1e-9):
        raise ParameterError(
            f"pulse duration {shape.duration_s:g} s exceeds slot duration {timing.slot_duration_s:g} s"
        )
    pulse = synthesize_pulse(shape, timing.sample_rate_hz).samples

    slots = len(marks)
    boundaries = timing.slot_boundaries(slots)
    samples = np.zeros(int(boundaries[-1]), dtype=np.float64)

    marked = np.flatnonzero(np.frombuffer(bytes(marks), dtype=np.uint8))
    if marked.size:
        width = min(pulse.size, int(np.diff(boundaries).min()))
        index = boundaries[marked][:, None] + np.arange(width)[None, :]
        samples[index] = pulse[:width]

    return Waveform(samples=samples, sample_rate_hz=timing.sample_rate_hz, origin_time_s=origin_time_s)


def modulate(packet: Packet, timing: SlotTiming, shape: PulseShape) -> Waveform:
    """
    Turn one packet into a waveform of n slots.

    Raises:
        ParameterError: If the packet length differs from the slot grid or
            the pulse is longer than a slot
    """
    if packet.n != timing.slots_per_packet:
        raise ParameterError(
            f"packet has {packet.n} slots, timing expects {timing.slots_per_packet}"
        )
    return modulate_slots(packet.marks, timing, shape)


def packet_samples(timing: SlotTiming) -> int:
    """Samples in one modulated packet."""
    return sample_index(timing.packet_duration_s, timing.sample_rate_hz)


def message_samples(plan: TransmissionPlan, timing: SlotTiming) -> int:
    """Samples in the active (pulse-carrying) part of one message."""
    return len(plan.packets) * packet_samples(timing)


def repetition_samples(plan: TransmissionPlan, timing: SlotTiming) -> int:
    """Samples in one message plus its trailing pause."""
    pause = sample_index(plan.inter_message_pause_s, timing.sample_rate_hz)
    return message_samples(plan, timing) + pause


def build_transmission(
    plan: TransmissionPlan,
    timing: SlotTiming,
    shape: PulseShape,
    origin_time_s: float = 0.0,
) -> Waveform:
    """
    Concatenate the plan's packets, append the pause, and repeat.

    Each packet is its own segment of ``packet_samples`` samples, so a
    message is the exact concatenation of its modulated packets. Every
    repetition has exactly ``repetition_samples`` samples; the message
    waveform is computed once and tiled.
    """
    message = np.concatenate([modulate(p, timing, shape).samples for p in plan.packets])

    period = repetition_samples(plan, timing)
    one = np.zeros(period, dtype=np.float64)
    one[: message.size] = message
    samples = np.tile(one, plan.repetitions)

    logger.debug(
        "built transmission: %d packets x %d repetitions, %d samples",
        len(plan.packets), plan.repetitions, samples.size,
    )
    return Waveform(samples=samples, sample_rate_hz=timing.sample_rate_hz, origin_time_s=origin_time_s)


def scale_signal(waveform: Waveform, gain: float) -> Waveform:
    """
    Multiply every sample by ``gain``.

    Raises:
        ParameterError: If gain is negative
    """
    if gain < 0:
        raise ParameterError(f"gain must be non-negative, got {gain}")
    return waveform.model_copy(update={"samples": waveform.samples * gain})


def data_rate_bps(params: CodecParams, timing: SlotTiming) -> float:
    """Information bits per second: k bits per packet duration."""
    return params.message_bits / (params.packet_slots * timing.slot_duration_s)
