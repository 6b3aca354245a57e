"""
End-to-end Monte Carlo experiments.

A packet-error-rate point sends the configured message ``repetitions``
times through the channel: modulate, scale, add noise, digitize, decide
slots and decode at every slot. Every message gets its own sub-seeds, so a
point depends only on (config, master seed, point index) and never on how
the work is scheduled.
"""

import hashlib
import json
import logging
import math
from typing import Iterable, Optional, Union

import numpy as np
import pydantic
import scipy
import sqlalchemy
from scipy import stats

import mppsim
from mppsim.exceptions import MeasurementError, MppSimError, ParameterError
from mppsim.schemas.codec import CodecParams, Message
from mppsim.schemas.detector import CalibrationResult, DetectionEvent, ThresholdMode, ThresholdPair
from mppsim.schemas.experiment import (
    PUBLISHED_HEADLINE_EB_NB_DB,
    PUBLISHED_HEADLINE_PER,
    CostProfileRow,
    EbNbConvention,
    ExperimentConfig,
    HallucinationRow,
    LinePhasePolicy,
    PerCurvePoint,
    ReferencePoint,
    RunManifest,
    SlotOffsetPolicy,
)
from mppsim.schemas.signal import PulseShape, SlotTiming, Waveform, sample_index
from mppsim.services.codec_service import (
    DEFAULT_DECODE_LIMIT,
    encode,
    hallucination_rate,
    independence_estimate,
    random_marks,
    search_marks,
)
from mppsim.services.detector_service import (
    calibrate_thresholds,
    decide_marks,
    digitize,
    slot_extremes,
    sliding_decode,
)
from mppsim.services.noise_service import apply_channel, noise_rms
from mppsim.services.signal_service import modulate_slots, packet_samples, synthesize_pulse
from mppsim.utils.seeding import derive_seed, rng_for

logger = logging.getLogger(__name__)

PEAK_FACTOR = 3.0
CONFIDENCE_LEVEL = 0.95

# sub-seed labels
_RMS_LABEL = 11
_CHANNEL_LABEL = 12
_PROBE_LABEL = 13
_OFFSET_LABEL = 14
_PHASE_LABEL = 15


# ---------------------------------------------------------------------------
# Eb/Nb and pulse power
# ---------------------------------------------------------------------------

def compute_eb_nb_db(
    signal_rms: float,
    noise_rms_volts: float,
    convention: EbNbConvention = EbNbConvention.TWENTY_LOG,
) -> float:
    """
    Eb/Nb in dB from rms voltages.

    The default convention treats the ratio as a voltage ratio
    (20 log10); ``10log`` takes it as a power ratio.

    Raises:
        ParameterError: If either rms is not positive

    Example:
        >>> compute_eb_nb_db(10.0, 1.0)
        20.0
    """
    if signal_rms <= 0 or noise_rms_volts <= 0:
        raise ParameterError("Eb/Nb needs positive signal and noise rms")
    factor = 20.0 if convention is EbNbConvention.TWENTY_LOG else 10.0
    return factor * math.log10(signal_rms / noise_rms_volts)


def _slot_pulse(shape: PulseShape, timing: SlotTiming) -> np.ndarray:
    pulse = synthesize_pulse(shape, timing.sample_rate_hz).samples
    slot = np.zeros(max(timing.slot_start(1), pulse.size))
    slot[: pulse.size] = pulse
    return slot


def pulse_rms(shape: PulseShape, timing: SlotTiming) -> float:
    """Rms of one clean pulse over one slot, at unit gain."""
    return float(np.sqrt(np.mean(_slot_pulse(shape, timing) ** 2)))


def measure_reference_ratio(
    reference: Union[PulseShape, Waveform],
    timing: SlotTiming = SlotTiming(),
) -> float:
    """
    Ratio rms / max of a pulse far above the noise.

    A ``PulseShape`` is synthesized and measured over one slot; a
    ``Waveform`` is measured as given.

    Raises:
        MeasurementError: If the reference has no positive maximum
    """
    if isinstance(reference, Waveform):
        samples = reference.samples
    else:
        samples = _slot_pulse(reference, timing)
    peak = float(samples.max())
    if peak <= 0:
        raise MeasurementError("reference pulse has no positive maximum")
    return float(np.sqrt(np.mean(samples ** 2))) / peak


def estimate_pulse_rms(
    trace: Waveform,
    reference_ratio: float,
    window_s: Optional[tuple[float, float]] = None,
) -> float:
    """
    Estimate a pulse's rms from its maximum and a reference rms/max ratio.

    Without a window the trace maximum is used and must stand clear of the
    noise floor (``PEAK_FACTOR`` robust standard deviations). With a window
    (absolute start and end times) the maximum inside it is used as is,
    which is how a pulse smaller than the noise is still measured.

    Raises:
        MeasurementError: If no pulse can be located
    """
    samples = trace.samples
    if window_s is not None:
        times = trace.times()
        inside = samples[(times >= window_s[0]) & (times < window_s[1])]
        if inside.size == 0:
            raise MeasurementError(f"window {window_s} holds no samples of the trace")
        return float(inside.max()) * reference_ratio

    peak = float(samples.max())
    floor = 1.4826 * float(np.median(np.abs(samples - np.median(samples))))
    if peak <= 0 or peak <= PEAK_FACTOR * floor:
        raise MeasurementError("no pulse stands above the noise floor; supply a window")
    return peak * reference_ratio


def signal_gain_for(cfg: ExperimentConfig, snr_db: float, noise_rms_volts: float) -> float:
    """Transmitter gain that puts the pulse rms ``snr_db`` above the noise rms."""
    if cfg.signal_gain is not None:
        return cfg.signal_gain
    if noise_rms_volts == 0.0:
        return 1.0
    factor = 20.0 if cfg.eb_nb_convention is EbNbConvention.TWENTY_LOG else 10.0
    return noise_rms_volts * 10.0 ** (snr_db / factor) / pulse_rms(cfg.shape, cfg.timing)


def measure_noise_rms(cfg: ExperimentConfig) -> float:
    return noise_rms(
        cfg.noise,
        cfg.rms_window_s,
        cfg.timing.sample_rate_hz,
        derive_seed(cfg.master_seed, _RMS_LABEL),
        cfg.rms_traces,
    )


# ---------------------------------------------------------------------------
# Channel simulation
# ---------------------------------------------------------------------------

class ChannelSimulation:
    """
    Sends the configured message through the channel at one gain.

    Per-slot extremes are cached per message, so re-deciding the same
    received streams under new thresholds (calibration probes) costs only
    the slot decisions and decodes.

    Args:
        cfg: Experiment configuration
        gain: Transmitter gain
        point_index: Grid position, part of every sub-seed
        stream_label: Separates measurement streams from probe streams
        cache: Keep per-slot extremes of every simulated message
    """

    def __init__(
        self,
        cfg: ExperimentConfig,
        gain: float,
        point_index: int = 0,
        stream_label: int = _CHANNEL_LABEL,
        cache: bool = True,
    ) -> None:
        self.cfg = cfg
        self.gain = gain
        self.point_index = point_index
        self.stream_label = stream_label
        self.cache = cache
        self.messages = cfg.messages()
        self.packets = [encode(m, cfg.codec) for m in self.messages]

        timing = cfg.timing
        # one continuous slot clock over guard, message and guard
        marks = bytes(cfg.guard_slots) + b"".join(p.marks for p in self.packets) + bytes(cfg.guard_slots + 1)
        self._clean = modulate_slots(marks, timing, cfg.shape).samples * gain

        pause = sample_index(cfg.inter_message_pause_s, timing.sample_rate_hz)
        self._period_s = (len(self.packets) * packet_samples(timing) + pause) / timing.sample_rate_hz
        self._extremes: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    @property
    def message_start_slot(self) -> int:
        return self.cfg.guard_slots

    def expected_end_slot(self, packet_index: int) -> int:
        """Slot at which packet ``packet_index`` completes, relative to the stream."""
        return self.message_start_slot + (packet_index + 1) * self.cfg.codec.packet_slots - 1

    def _seed(self, *labels: int) -> int:
        return derive_seed(self.cfg.master_seed, *labels, self.point_index)

    def extremes(self, message_index: int) -> tuple[np.ndarray, np.ndarray]:
        """Per-slot (max, min) counts of one received message."""
        cached = self._extremes.get(message_index)
        if cached is not None:
            return cached

        cfg = self.cfg
        fs = cfg.timing.sample_rate_hz
        origin_s = message_index * self._period_s
        if cfg.line_phase_policy is LinePhasePolicy.RANDOM and cfg.noise.harmonics is not None:
            line_period = 1.0 / cfg.noise.harmonics.fundamental_hz
            origin_s += rng_for(self._seed(_PHASE_LABEL), message_index).uniform(0.0, line_period)
        start = sample_index(origin_s, fs)

        offset_s = cfg.slot_offset_s
        if cfg.slot_offset_policy is SlotOffsetPolicy.RANDOM:
            offset_s = rng_for(self._seed(_OFFSET_LABEL), message_index).uniform(0.0, cfg.timing.slot_duration_s)

        clean = Waveform(samples=self._clean, sample_rate_hz=fs, origin_time_s=start / fs)
        received = apply_channel(clean, cfg.noise, derive_seed(self._seed(self.stream_label), message_index))
        result = slot_extremes(digitize(received, cfg.adc), cfg.timing, offset_s)
        if self.cache:
            self._extremes[message_index] = result
        return result

    def events(self, message_index: int, thresholds: ThresholdPair) -> list[DetectionEvent]:
        maxima, minima = self.extremes(message_index)
        marks = decide_marks(maxima, minima, thresholds).tobytes()
        return sliding_decode(marks, self.cfg.codec, ascii_only=self.cfg.ascii_only)

    def __call__(self, thresholds: ThresholdPair, probe_index: int) -> list[Message]:
        """Calibration probe: every message decoded over ``probe_messages`` sends."""
        decoded = []
        for index in range(self.cfg.probe_messages):
            decoded.extend(event.message for event in self.events(index, thresholds))
        logger.debug("probe %d (%s): %d decodes", probe_index, thresholds.describe(), len(decoded))
        return decoded


def calibrate_for_point(
    cfg: ExperimentConfig,
    mode: ThresholdMode,
    gain: float,
    point_index: int = 0,
) -> CalibrationResult:
    """
    Run the threshold sweep against probe streams at one gain.

    Raises:
        CalibrationError: If no setting decodes a known message
    """
    probe = ChannelSimulation(cfg, gain, point_index, stream_label=_PROBE_LABEL)
    return calibrate_thresholds(probe, probe.messages, mode, cfg.adc)


def binomial_interval(failures: int, trials: int, level: float = CONFIDENCE_LEVEL) -> tuple[float, float]:
    """Clopper-Pearson interval for a failure proportion."""
    if trials < 1:
        raise ParameterError("a confidence interval needs at least one trial")
    ci = stats.binomtest(failures, trials).proportion_ci(confidence_level=level, method="exact")
    return float(ci.low), float(ci.high)


def run_per_point(
    cfg: ExperimentConfig,
    snr_db: float,
    mode: ThresholdMode = ThresholdMode.DUAL,
    point_index: int = 0,
    noise_rms_volts: Optional[float] = None,
) -> PerCurvePoint:
    """
    Measure the packet error rate at one Eb/Nb value.

    A sent packet is ok when its message is detected with an end slot
    within one slot of the packet's own last slot. Any detected message
    outside the sent set is a hallucination.

    Args:
        cfg: Experiment configuration
        snr_db: Requested Eb/Nb
        mode: Threshold mode
        point_index: Grid position (selects the noise realization)
        noise_rms_volts: Precomputed noise rms; measured when omitted

    Raises:
        CalibrationError: If calibration is enabled and fails
    """
    if noise_rms_volts is None:
        noise_rms_volts = measure_noise_rms(cfg)
    gain = signal_gain_for(cfg, snr_db, noise_rms_volts)

    eb_nb_db = snr_db
    if cfg.signal_gain is not None and noise_rms_volts > 0.0 and gain > 0.0:
        eb_nb_db = compute_eb_nb_db(gain * pulse_rms(cfg.shape, cfg.timing), noise_rms_volts, cfg.eb_nb_convention)

    if cfg.calibrate:
        thresholds = calibrate_for_point(cfg, mode, gain, point_index).thresholds
    else:
        thresholds = cfg.thresholds_for(mode)

    logger.info("PER point %.2f dB (%s), gain %.4g: starting", eb_nb_db, thresholds.describe(), gain)
    simulation = ChannelSimulation(cfg, gain, point_index, cache=False)
    sent = set(simulation.messages)
    expected = [simulation.expected_end_slot(j) for j in range(len(simulation.messages))]

    ok = hallucinations = complete = partial = corrupted = 0
    for index in range(cfg.repetitions):
        events = simulation.events(index, thresholds)
        hallucinations += sum(1 for e in events if e.message not in sent)

        received = sum(
            1
            for message, end in zip(simulation.messages, expected)
            if any(e.message == message and abs(e.end_slot_index - end) <= 1 for e in events)
        )
        ok += received
        if received == len(simulation.messages):
            complete += 1
        elif received:
            partial += 1
        elif events:
            corrupted += 1

    packets_sent = cfg.repetitions * len(simulation.messages)
    dropped = packets_sent - ok
    ci_low, ci_high = binomial_interval(dropped, packets_sent)
    point = PerCurvePoint(
        eb_nb_db=eb_nb_db,
        threshold_mode=mode,
        packets_sent=packets_sent,
        packets_ok=ok,
        packets_dropped=dropped,
        per=dropped / packets_sent,
        hallucinations=hallucinations,
        ci_low=ci_low,
        ci_high=ci_high,
        messages_complete=complete,
        messages_partial=partial,
        messages_corrupted=corrupted,
        upper=thresholds.upper,
        lower=thresholds.lower,
    )
    logger.info("PER point %.2f dB (%s): per=%.4g over %d packets", eb_nb_db, mode.value, point.per, packets_sent)
    return point


def run_per_curve(cfg: ExperimentConfig) -> list[PerCurvePoint]:
    """
    One point per grid entry and threshold mode, in grid order.

    Both modes at a grid entry see the same noise realization. A failing
    point is reported with ``error`` set and the sweep continues.
    """
    noise_rms_volts = measure_noise_rms(cfg)
    logger.info("noise rms: %.4g V", noise_rms_volts)

    points: list[PerCurvePoint] = []
    for point_index, snr_db in enumerate(cfg.snr_grid_db):
        for mode in cfg.modes:
            try:
                points.append(run_per_point(cfg, snr_db, mode, point_index, noise_rms_volts))
            except MppSimError as exc:
                logger.warning("PER point %.2f dB (%s) failed: %s", snr_db, mode.value, exc)
                points.append(PerCurvePoint(
                    eb_nb_db=snr_db,
                    threshold_mode=mode,
                    packets_sent=0,
                    packets_ok=0,
                    packets_dropped=0,
                    per=math.nan,
                    error=str(exc),
                ))
    return points


# ---------------------------------------------------------------------------
# Codec statistics
# ---------------------------------------------------------------------------

def decoder_cost_profile(
    params: CodecParams,
    densities: Iterable[float],
    trials: int,
    seed: int = 0,
    limit: int = DEFAULT_DECODE_LIMIT,
) -> list[CostProfileRow]:
    """
    Mean DFS node expansions of an exhaustive decode of random packets.

    Trial t draws the same uniforms at every density, so denser packets
    are supersets of sparser ones.
    """
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    rows = []
    for density in densities:
        if not 0.0 <= density <= 1.0:
            raise ParameterError(f"density must lie in [0, 1], got {density}")
        expansions = truncated = 0
        for trial in range(trials):
            marks = random_marks(params.packet_slots, density, rng_for(seed, trial))
            _, count, cut = search_marks(marks, params, limit)
            expansions += count
            truncated += cut
        rows.append(CostProfileRow(
            density=density,
            trials=trials,
            mean_node_expansions=expansions / trials,
            truncated_fraction=truncated / trials,
        ))
        logger.debug("cost profile density %.3f: %.2f expansions", density, expansions / trials)
    return rows


def hallucination_profile(
    params: CodecParams,
    densities: Iterable[float],
    trials: int,
    seed: int = 0,
) -> list[HallucinationRow]:
    """Measured hallucination rate beside the 2^k d^(k+c) estimate, per density."""
    return [
        HallucinationRow(
            density=density,
            trials=trials,
            measured_rate=hallucination_rate(density, params, trials, seed),
            independence_estimate=independence_estimate(density, params),
        )
        for density in densities
    ]


# ---------------------------------------------------------------------------
# Reporting
# ---------------------------------------------------------------------------

def headline_summary(points: list[PerCurvePoint]) -> Optional[str]:
    """Compare the dual-threshold point at 16 dB with the published value."""
    for point in points:
        if (
            point.threshold_mode is ThresholdMode.DUAL
            and point.error is None
            and math.isclose(point.eb_nb_db, PUBLISHED_HEADLINE_EB_NB_DB, abs_tol=1e-9)
        ):
            if point.per > 0:
                orders = math.log10(point.per / PUBLISHED_HEADLINE_PER)
                note = f"{orders:+.1f} orders of magnitude from published"
            else:
                note = f"no drops in {point.packets_sent} packets"
            return (
                f"headline: dual-threshold PER at {PUBLISHED_HEADLINE_EB_NB_DB:g} dB = {point.per:.3g} "
                f"(95% CI {point.ci_low:.3g}..{point.ci_high:.3g}); published {PUBLISHED_HEADLINE_PER:g}; {note}"
            )
    return None


def format_summary(points: list[PerCurvePoint], reference: Iterable[ReferencePoint] = ()) -> str:
    """Plain-text table of a curve, with reference points listed beside it."""
    lines = [f"{'Eb/Nb dB':>9} {'mode':>6} {'sent':>8} {'dropped':>8} {'PER':>10} {'CI':>21} {'halluc':>7}"]
    for p in points:
        if p.error is not None:
            lines.append(f"{p.eb_nb_db:>9.2f} {p.threshold_mode.value:>6}  error: {p.error}")
            continue
        ci = f"{p.ci_low:.3g}..{p.ci_high:.3g}"
        lines.append(
            f"{p.eb_nb_db:>9.2f} {p.threshold_mode.value:>6} {p.packets_sent:>8} "
            f"{p.packets_dropped:>8} {p.per:>10.3g} {ci:>21} {p.hallucinations:>7}"
        )
    reference = list(reference)
    if reference:
        lines.append("reference:")
        lines.extend(f"{r.eb_nb_db:>9.2f} {r.label:>6} {r.per:>10.3g}" for r in reference)
    headline = headline_summary(points)
    if headline:
        lines.append(headline)
    return "\n".join(lines)


def config_digest(cfg: ExperimentConfig) -> str:
    canonical = json.dumps(cfg.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def component_versions() -> dict[str, str]:
    return {
        "mppsim": mppsim.__version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pydantic": pydantic.VERSION,
        "sqlalchemy": sqlalchemy.__version__,
    }


def build_manifest(cfg: ExperimentConfig, curve_csv_path: Optional[str] = None) -> RunManifest:
    """Record the effective config, seed and versions behind a curve."""
    return RunManifest(
        config_digest=config_digest(cfg),
        master_seed=cfg.master_seed,
        config=cfg.model_dump(mode="json"),
        versions=component_versions(),
        curve_csv_path=curve_csv_path,
    )
