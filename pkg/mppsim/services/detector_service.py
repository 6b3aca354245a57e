"""
ADC quantization, per-slot threshold decisions, sliding-window decoding and
empirical threshold calibration.

The detector runs asynchronously: it cuts the sample stream into slot
windows from an arbitrary start offset, turns each window into a mark by
comparing its extreme counts with the thresholds, and attempts a full
decode over the most recent n marks at every slot boundary.
"""

import logging
from typing import Iterable, Protocol, Sequence, Union

import numpy as np

from mppsim.exceptions import CalibrationError, ParameterError
from mppsim.schemas.codec import CodecParams, Message
from mppsim.schemas.detector import (
    AdcConfig,
    CalibrationResult,
    CalibrationStep,
    DetectionEvent,
    SlotDecision,
    ThresholdMode,
    ThresholdPair,
)
from mppsim.schemas.signal import SlotTiming, Waveform, sample_index
from mppsim.services.codec_service import search_marks

logger = logging.getLogger(__name__)

CALIBRATION_STEP = 100


def digitize(waveform: "Waveform | np.ndarray", adc: AdcConfig = AdcConfig()) -> np.ndarray:
    """
    Convert volts to ADC counts.

    count = round((v - low) / (high - low) * max_count), ties away from
    zero, clamped to [0, max_count].

    Example:
        >>> digitize(np.array([-4.0, 0.0, 4.0, 10.0])).tolist()
        [0, 2000, 4000, 4000]
    """
    volts = waveform.samples if isinstance(waveform, Waveform) else np.asarray(waveform, dtype=np.float64)
    scaled = (volts - adc.full_scale_low_volts) / (
        adc.full_scale_high_volts - adc.full_scale_low_volts
    ) * adc.max_count
    rounded = np.sign(scaled) * np.floor(np.abs(scaled) + 0.5)
    return np.clip(rounded, 0, adc.max_count).astype(np.int32)


def volts_to_count(volts: float, adc: AdcConfig = AdcConfig()) -> int:
    return int(digitize(np.array([volts]), adc)[0])


def count_to_volts(count: int, adc: AdcConfig = AdcConfig()) -> float:
    span = adc.full_scale_high_volts - adc.full_scale_low_volts
    return adc.full_scale_low_volts + count / adc.max_count * span


def decide_slot(counts: Sequence[int], thresholds: ThresholdPair, slot_index: int = 0) -> SlotDecision:
    """
    Decide whether one slot holds a mark.

    Raises:
        ParameterError: If the slot holds no samples
    """
    if len(counts) == 0:
        raise ParameterError("a slot needs at least one count")
    high = int(np.max(counts))
    low = int(np.min(counts))
    return SlotDecision(
        slot_index=slot_index,
        mark=bool(decide_marks(np.array([high]), np.array([low]), thresholds)[0]),
        max_count=high,
        min_count=low,
    )


def decide_marks(maxima: np.ndarray, minima: np.ndarray, thresholds: ThresholdPair) -> np.ndarray:
    """Vectorized threshold rule over per-slot extremes; returns 0/1 uint8."""
    marks = maxima > thresholds.upper
    if thresholds.mode is ThresholdMode.DUAL:
        marks |= minima < thresholds.lower
    return marks.astype(np.uint8)


def slot_extremes(
    counts: np.ndarray,
    timing: SlotTiming,
    offset_s: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Per-slot (max, min) counts over consecutive slot windows.

    Windows start ``offset_s`` into the stream and follow the same
    floor-snapped grid as the modulator. A trailing partial slot is dropped.
    """
    counts = np.asarray(counts)
    start = sample_index(offset_s, timing.sample_rate_hz)
    usable = counts.size - start
    slots = int((usable / timing.sample_rate_hz + 1e-12) // timing.slot_duration_s) if usable > 0 else 0
    while slots > 0 and timing.slot_boundaries(slots, offset_s)[-1] > counts.size:
        slots -= 1
    if slots < 1:
        raise ParameterError("the count stream does not cover a single slot")

    bounds = timing.slot_boundaries(slots, offset_s)
    covered = counts[: bounds[-1]]
    maxima = np.maximum.reduceat(covered, bounds[:-1])
    minima = np.minimum.reduceat(covered, bounds[:-1])
    return maxima, minima


def slot_marks(
    counts: np.ndarray,
    timing: SlotTiming,
    thresholds: ThresholdPair,
    offset_s: float = 0.0,
) -> bytes:
    """Slot decisions as a raw 0/1 buffer, ready for ``sliding_decode``."""
    maxima, minima = slot_extremes(counts, timing, offset_s)
    return decide_marks(maxima, minima, thresholds).tobytes()


def slot_stream(
    counts: np.ndarray,
    timing: SlotTiming,
    thresholds: ThresholdPair,
    offset_s: float = 0.0,
) -> list[SlotDecision]:
    """One decision per slot window, in stream order."""
    maxima, minima = slot_extremes(counts, timing, offset_s)
    marks = decide_marks(maxima, minima, thresholds)
    return [
        SlotDecision(slot_index=i, mark=bool(m), max_count=int(hi), min_count=int(lo))
        for i, (m, hi, lo) in enumerate(zip(marks, maxima, minima))
    ]


def sliding_decode(
    decisions: Union[Sequence[SlotDecision], bytes],
    params: CodecParams,
    dedup_window: "int | None" = None,
    first_slot_index: int = 0,
    ascii_only: bool = False,
) -> list[DetectionEvent]:
    """
    Attempt a first-match decode over the latest n slots at every slot.

    An event is suppressed when the same message was already emitted within
    the last ``dedup_window`` slots (default n).

    Args:
        decisions: Slot decisions, or their marks as a 0/1 buffer
        params: Codec parameters
        dedup_window: Suppression window in slots
        first_slot_index: Absolute index of the first decision
        ascii_only: Force the top bit of every message byte to 0

    Returns:
        Events in stream order
    """
    if isinstance(decisions, (bytes, bytearray)):
        marks = bytes(decisions)
    else:
        marks = bytes(int(d.mark) for d in decisions)
        if decisions and first_slot_index == 0:
            first_slot_index = decisions[0].slot_index
    n = params.packet_slots
    dedup = n if dedup_window is None else dedup_window
    k = params.message_bits

    events: list[DetectionEvent] = []
    last_seen: dict[int, int] = {}
    for end in range(n - 1, len(marks)):
        window = marks[end - n + 1:end + 1]
        found, _, _ = search_marks(window, params, 1, ascii_only=ascii_only)
        if not found:
            continue
        value = found[0]
        slot = first_slot_index + end
        previous = last_seen.get(value)
        if previous is not None and slot - previous <= dedup:
            continue
        last_seen[value] = slot
        events.append(DetectionEvent(
            end_slot_index=slot,
            message=Message(value=value, length=k),
            window_density=window.count(1) / n,
        ))
    return events


class ProbeRunner(Protocol):
    """Runs one calibration probe and returns every decoded message."""

    def __call__(self, thresholds: ThresholdPair, probe_index: int) -> list[Message]: ...


def _score(decoded: Iterable[Message], known: set[Message]) -> tuple[int, int]:
    valid = gibberish = 0
    for message in decoded:
        if message in known:
            valid += 1
        else:
            gibberish += 1
    return valid, gibberish


def calibrate_thresholds(
    probe: ProbeRunner,
    known_messages: Iterable[Message],
    mode: ThresholdMode = ThresholdMode.DUAL,
    adc: AdcConfig = AdcConfig(),
    step: int = CALIBRATION_STEP,
) -> CalibrationResult:
    """
    Set thresholds by the empirical sweep used on the bench.

    1. Start with upper = max_count, lower = 0 (nothing is a mark).
    2. Lower ``upper`` by ``step`` until a probe decodes a known message,
       then keep lowering until a probe also decodes gibberish (a message
       outside the known set); raise ``upper`` back by one step and fix it.
       It never goes back above the first level that decoded.
    3. Dual mode only: raise ``lower`` by ``step`` until gibberish, then
       back off one step and fix it.

    ``upper`` never drops to or below the zero-volt count and ``lower`` never
    rises to it; reaching either bound without gibberish fixes the bound.

    Raises:
        CalibrationError: If no setting ever decodes a known message; the
            error carries the sweep log
    """
    known = set(known_messages)
    if not known:
        raise ParameterError("calibration needs at least one known message")
    zero = adc.max_count // 2
    log: list[CalibrationStep] = []

    def run(upper: int, lower: int) -> tuple[int, int]:
        pair = ThresholdPair(upper=upper, lower=lower, mode=mode)
        valid, gibberish = _score(probe(pair, len(log)), known)
        log.append(CalibrationStep(step=len(log), upper=upper, lower=lower, decodes=valid, gibberish=gibberish))
        logger.debug("calibration probe %s: %d valid, %d gibberish", pair.describe(), valid, gibberish)
        return valid, gibberish

    upper = adc.max_count
    first_decode = None
    gibberish_at = None
    valid, gibberish = run(upper, 0)
    if valid:
        first_decode = upper
        if gibberish:
            gibberish_at = upper
    while gibberish_at is None and upper - step > zero:
        upper -= step
        valid, gibberish = run(upper, 0)
        if first_decode is None and valid:
            first_decode = upper
        if first_decode is not None and gibberish:
            gibberish_at = upper

    if first_decode is None:
        raise CalibrationError("no threshold setting produced a valid decode", sweep_log=log)
    fixed_upper = upper if gibberish_at is None else min(gibberish_at + step, first_decode)
    logger.info("calibrated upper threshold: %d", fixed_upper)

    if mode is ThresholdMode.SINGLE:
        return CalibrationResult(thresholds=ThresholdPair(upper=fixed_upper, lower=0, mode=mode), sweep_log=log)

    lower = 0
    gibberish_at = None
    while lower + step < zero:
        lower += step
        _, gibberish = run(fixed_upper, lower)
        if gibberish:
            gibberish_at = lower
            break
    fixed_lower = lower if gibberish_at is None else gibberish_at - step
    logger.info("calibrated lower threshold: %d", fixed_lower)
    return CalibrationResult(
        thresholds=ThresholdPair(upper=fixed_upper, lower=fixed_lower, mode=mode),
        sweep_log=log,
    )
