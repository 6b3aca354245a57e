import numpy as np
import pytest
from pydantic import ValidationError

from mppsim.exceptions import ParameterError
from mppsim.schemas.codec import CodecParams, Packet
from mppsim.schemas.signal import PulseShape, SlotTiming, TransmissionPlan, Waveform, sample_index
from mppsim.services.signal_service import (
    build_transmission,
    data_rate_bps,
    message_samples,
    modulate,
    modulate_slots,
    packet_samples,
    repetition_samples,
    scale_signal,
    synthesize_pulse,
)


class TestTiming:
    def test_sample_snapping(self):
        assert sample_index(3.9e-6, 4.1e7) == 159
        assert sample_index(0.0, 4.1e7) == 0

    def test_packet_samples(self):
        assert packet_samples(SlotTiming()) == 40934

    def test_slot_boundaries_never_drift(self):
        timing = SlotTiming()
        bounds = timing.slot_boundaries(256)
        assert bounds[0] == 0
        assert bounds[-1] == packet_samples(timing)
        assert set(np.diff(bounds).tolist()) <= {159, 160}

    def test_rejects_undersampled_grid(self):
        with pytest.raises(ValidationError):
            SlotTiming(sample_rate_hz=1.0e6)

    def test_data_rate(self):
        assert data_rate_bps(CodecParams(), SlotTiming()) == pytest.approx(64102.56, rel=1e-6)


class TestPulse:
    def test_peaks(self):
        pulse = synthesize_pulse(PulseShape(), 4.1e7)
        assert len(pulse) == 159
        assert pulse.samples.max() == pytest.approx(50.0)
        assert pulse.samples.min() == pytest.approx(-40.0)
        assert pulse.samples[0] == 0.0

    def test_custom_peaks(self):
        pulse = synthesize_pulse(PulseShape(positive_peak_volts=2.0, negative_peak_volts=1.0), 4.1e7)
        assert pulse.samples.max() == pytest.approx(2.0)
        assert pulse.samples.min() == pytest.approx(-1.0)

    def test_undersampling(self):
        with pytest.raises(ParameterError):
            synthesize_pulse(PulseShape(), 1.0e6)

    def test_copy_is_writable(self):
        pulse = synthesize_pulse(PulseShape(), 4.1e7)
        pulse.samples[0] = 1.0
        assert synthesize_pulse(PulseShape(), 4.1e7).samples[0] == 0.0

    def test_shape_needs_a_full_ring(self):
        with pytest.raises(ValidationError):
            PulseShape(ring_frequency_hz=1.0e5, duration_s=3.9e-6)


class TestModulate:
    def test_pulses_land_on_slot_starts(self):
        timing = SlotTiming()
        pulse = synthesize_pulse(PulseShape(), timing.sample_rate_hz).samples
        waveform = modulate(Packet.from_indices(256, [0, 5]), timing, PulseShape())
        assert len(waveform) == packet_samples(timing)
        start = timing.slot_start(5)
        np.testing.assert_array_equal(waveform.samples[start:start + pulse.size], pulse)
        np.testing.assert_array_equal(waveform.samples[: pulse.size], pulse)
        assert np.count_nonzero(waveform.samples[timing.slot_start(1):start]) == 0

    def test_empty_packet_is_silent(self):
        waveform = modulate(Packet.empty(256), SlotTiming(), PulseShape())
        assert not waveform.samples.any()

    def test_length_mismatch(self):
        with pytest.raises(ParameterError):
            modulate(Packet.empty(64), SlotTiming(), PulseShape())

    def test_pulse_longer_than_slot(self):
        with pytest.raises(ParameterError):
            modulate(Packet.empty(256), SlotTiming(), PulseShape(duration_s=5.0e-6))

    def test_continuous_grid_matches_single_packet(self):
        timing = SlotTiming()
        packet = Packet.from_indices(256, [3, 100, 255])
        joined = modulate_slots(packet.marks * 2, timing, PulseShape())
        assert len(joined) == timing.slot_start(512)
        np.testing.assert_array_equal(joined.samples[: packet_samples(timing)], modulate(packet, timing, PulseShape()).samples)


class TestTransmission:
    def test_layout(self):
        timing = SlotTiming()
        packets = [Packet.from_indices(256, [0]), Packet.from_indices(256, [7])]
        plan = TransmissionPlan(packets=packets, inter_message_pause_s=0.001, repetitions=3)
        waveform = build_transmission(plan, timing, PulseShape())

        assert message_samples(plan, timing) == 2 * 40934
        assert repetition_samples(plan, timing) == 2 * 40934 + 41000
        assert len(waveform) == 3 * repetition_samples(plan, timing)

        first = np.concatenate([modulate(p, timing, PulseShape()).samples for p in packets])
        period = repetition_samples(plan, timing)
        for rep in range(3):
            np.testing.assert_array_equal(waveform.samples[rep * period: rep * period + first.size], first)
            assert not waveform.samples[rep * period + first.size:(rep + 1) * period].any()

    def test_plan_needs_equal_packets(self):
        with pytest.raises(ValidationError):
            TransmissionPlan(packets=[Packet.empty(256), Packet.empty(64)])


class TestWaveform:
    def test_scale(self):
        waveform = Waveform(samples=[1.0, -2.0], sample_rate_hz=10.0)
        np.testing.assert_array_equal(scale_signal(waveform, 0.5).samples, [0.5, -1.0])

    def test_negative_gain(self):
        with pytest.raises(ParameterError):
            scale_signal(Waveform(samples=[1.0], sample_rate_hz=10.0), -1.0)

    def test_rejects_non_finite(self):
        with pytest.raises(ValidationError):
            Waveform(samples=[1.0, float("nan")], sample_rate_hz=10.0)

    def test_rms_and_times(self):
        waveform = Waveform(samples=[3.0, -3.0], sample_rate_hz=2.0, origin_time_s=1.0)
        assert waveform.rms() == 3.0
        np.testing.assert_allclose(waveform.times(), [1.0, 1.5])
