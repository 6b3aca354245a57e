import numpy as np
import pytest
from pydantic import ValidationError

from mppsim.exceptions import CalibrationError, ParameterError
from mppsim.schemas.codec import CodecParams, Message, Packet
from mppsim.schemas.detector import AdcConfig, SlotDecision, ThresholdMode, ThresholdPair
from mppsim.schemas.signal import PulseShape, SlotTiming, Waveform
from mppsim.services.codec_service import encode
from mppsim.services.detector_service import (
    calibrate_thresholds,
    count_to_volts,
    decide_marks,
    decide_slot,
    digitize,
    sliding_decode,
    slot_extremes,
    slot_marks,
    slot_stream,
    volts_to_count,
)
from mppsim.services.signal_service import modulate_slots

DUAL = ThresholdPair(upper=3500, lower=500, mode=ThresholdMode.DUAL)
SINGLE = ThresholdPair(upper=3500, lower=500, mode=ThresholdMode.SINGLE)


class TestAdc:
    def test_anchors(self):
        counts = digitize(np.array([-4.0, 0.0, 4.0]))
        assert counts.tolist() == [0, 2000, 4000]

    def test_clamping(self):
        assert digitize(np.array([-10.0, 10.0])).tolist() == [0, 4000]

    def test_accepts_waveforms(self):
        waveform = Waveform(samples=[0.0, 2.0], sample_rate_hz=1.0)
        assert digitize(waveform).tolist() == [2000, 3000]
        assert digitize(waveform).dtype == np.int32

    def test_count_volts_helpers(self):
        assert volts_to_count(-2.0) == 1000
        assert count_to_volts(3000) == pytest.approx(2.0)
        assert count_to_volts(volts_to_count(1.2345)) == pytest.approx(1.2345, abs=1e-3)

    def test_custom_range(self):
        adc = AdcConfig(full_scale_low_volts=0.0, full_scale_high_volts=1.0, max_count=100)
        assert digitize(np.array([0.0, 0.5, 1.0]), adc).tolist() == [0, 50, 100]

    def test_range_must_be_ordered(self):
        with pytest.raises(ValidationError):
            AdcConfig(full_scale_low_volts=1.0, full_scale_high_volts=-1.0)


class TestThresholds:
    def test_dual_needs_zero_between(self):
        with pytest.raises(ValidationError):
            ThresholdPair(upper=3500, lower=2500, mode=ThresholdMode.DUAL)
        ThresholdPair(upper=3500, lower=2500, mode=ThresholdMode.SINGLE)

    def test_describe(self):
        assert DUAL.describe() == "upper=3500 lower=500 mode=dual"

    def test_upper_crossing_marks(self):
        decision = decide_slot([2000, 3600, 1900], DUAL, slot_index=4)
        assert decision.mark
        assert decision.slot_index == 4
        assert (decision.max_count, decision.min_count) == (3600, 1900)

    def test_threshold_is_strict(self):
        assert not decide_slot([3500], SINGLE).mark

    def test_lower_crossing_only_in_dual(self):
        counts = [2000, 400]
        assert decide_slot(counts, DUAL).mark
        assert not decide_slot(counts, SINGLE).mark

    def test_empty_slot(self):
        with pytest.raises(ParameterError):
            decide_slot([], DUAL)

    def test_vectorized(self):
        marks = decide_marks(np.array([3600, 2000, 2000]), np.array([2000, 400, 1000]), DUAL)
        assert marks.tolist() == [1, 1, 0]
        assert marks.dtype == np.uint8


class TestSlotWindows:
    timing = SlotTiming()

    def test_extremes_drop_trailing_partial_slot(self):
        bounds = self.timing.slot_boundaries(3)
        counts = np.full(bounds[-1] + 50, 2000, dtype=np.int32)
        counts[bounds[1] + 10] = 3900
        counts[bounds[2] + 3] = 100
        counts[-1] = 4000
        maxima, minima = slot_extremes(counts, self.timing)
        assert maxima.tolist() == [2000, 3900, 2000]
        assert minima.tolist() == [2000, 2000, 100]

    def test_offset_shifts_windows(self):
        counts = np.full(self.timing.slot_boundaries(4)[-1], 2000, dtype=np.int32)
        counts[10] = 3900
        half = self.timing.slot_duration_s / 2
        maxima, _ = slot_extremes(counts, self.timing, offset_s=half)
        assert maxima.size == 3
        assert 3900 not in maxima.tolist()

    def test_too_short(self):
        with pytest.raises(ParameterError):
            slot_extremes(np.zeros(100, dtype=np.int32), self.timing)

    def test_stream_and_marks_agree(self):
        packet = Packet.from_indices(256, [0, 17, 200])
        counts = digitize(modulate_slots(packet.marks, self.timing, PulseShape()))
        marks = slot_marks(counts, self.timing, DUAL)
        decisions = slot_stream(counts, self.timing, DUAL)
        assert marks == packet.marks
        assert [int(d.mark) for d in decisions] == list(packet.marks)
        assert decisions[17].slot_index == 17


class TestSlidingDecode:
    params = CodecParams()

    def stream(self, *messages: str, guard: int = 10) -> bytes:
        packets = b"".join(encode(Message.from_ascii(m), self.params).marks for m in messages)
        return bytes(guard) + packets + bytes(guard)

    def test_finds_message_at_its_last_slot(self):
        events = sliding_decode(self.stream("Hello1!\n"), self.params)
        assert len(events) == 1
        assert events[0].message == Message.from_ascii("Hello1!\n")
        assert events[0].end_slot_index == 10 + 255
        packet = encode(Message.from_ascii("Hello1!\n"), self.params)
        assert events[0].window_density == pytest.approx(packet.popcount / 256)

    def test_consecutive_packets(self):
        events = sliding_decode(self.stream("Hello1!\n", "Hello2!\n"), self.params)
        assert [e.message.to_ascii() for e in events] == ["Hello1!\n", "Hello2!\n"]
        assert [e.end_slot_index for e in events] == [265, 521]

    def test_duplicates_within_window_suppressed(self):
        marks = self.stream("Hello1!\n", "Hello1!\n")
        assert len(sliding_decode(marks, self.params)) == 1
        assert len(sliding_decode(marks, self.params, dedup_window=255)) == 2

    def test_decision_objects_carry_slot_index(self):
        marks = self.stream("Hello3!\n")
        decisions = [
            SlotDecision(slot_index=100 + i, mark=bool(m), max_count=0, min_count=0)
            for i, m in enumerate(marks)
        ]
        events = sliding_decode(decisions, self.params)
        assert events[0].end_slot_index == 100 + 10 + 255

    def test_short_stream_has_no_events(self):
        assert sliding_decode(bytes(100), self.params) == []


class FakeProbe:
    """Probe stand-in: valid at or below ``valid_below``, junk past the other two bounds."""

    def __init__(self, valid_below=3000, junk_below=2500, junk_lower=1500):
        self.valid_below = valid_below
        self.junk_below = junk_below
        self.junk_lower = junk_lower
        self.calls = []

    def __call__(self, thresholds, probe_index):
        self.calls.append((thresholds, probe_index))
        decoded = []
        if self.valid_below is not None and thresholds.upper <= self.valid_below:
            decoded.append(KNOWN)
        if self.junk_below is not None and thresholds.upper <= self.junk_below:
            decoded.append(JUNK)
        if self.junk_lower is not None and thresholds.lower >= self.junk_lower:
            decoded.append(JUNK)
        return decoded


KNOWN = Message(value=1, length=8)
JUNK = Message(value=2, length=8)


class TestCalibration:
    def test_dual_sweep(self):
        probe = FakeProbe()
        result = calibrate_thresholds(probe, [KNOWN], ThresholdMode.DUAL)
        assert (result.thresholds.upper, result.thresholds.lower) == (2600, 1400)
        assert result.thresholds.mode is ThresholdMode.DUAL
        assert len(result.sweep_log) == 16 + 15
        assert [c[1] for c in probe.calls] == list(range(31))

    def test_steps_are_100_counts(self):
        result = calibrate_thresholds(FakeProbe(), [KNOWN], ThresholdMode.DUAL)
        upper_phase = [s.upper for s in result.sweep_log if s.lower == 0]
        lower_phase = [s.lower for s in result.sweep_log if s.lower > 0]
        assert all(a - b == 100 for a, b in zip(upper_phase, upper_phase[1:]))
        assert all(b - a == 100 for a, b in zip(lower_phase, lower_phase[1:]))

    def test_single_mode_stops_after_upper(self):
        result = calibrate_thresholds(FakeProbe(), [KNOWN], ThresholdMode.SINGLE)
        assert result.thresholds.upper == 2600
        assert result.thresholds.mode is ThresholdMode.SINGLE
        assert len(result.sweep_log) == 16

    def test_never_above_first_decode(self):
        probe = FakeProbe(valid_below=3000, junk_below=3000)
        result = calibrate_thresholds(probe, [KNOWN], ThresholdMode.SINGLE)
        assert result.thresholds.upper == 3000

    def test_no_gibberish_keeps_the_bounds(self):
        probe = FakeProbe(junk_below=None, junk_lower=None)
        result = calibrate_thresholds(probe, [KNOWN], ThresholdMode.DUAL)
        assert (result.thresholds.upper, result.thresholds.lower) == (2100, 1900)

    def test_failure_carries_the_log(self):
        probe = FakeProbe(valid_below=None, junk_below=None)
        with pytest.raises(CalibrationError) as info:
            calibrate_thresholds(probe, [KNOWN], ThresholdMode.DUAL)
        log = info.value.sweep_log
        assert len(log) == 20
        assert log[0].upper == 4000 and log[-1].upper == 2100
        assert all(step.decodes == 0 for step in log)

    def test_needs_known_messages(self):
        with pytest.raises(ParameterError):
            calibrate_thresholds(FakeProbe(), [])
