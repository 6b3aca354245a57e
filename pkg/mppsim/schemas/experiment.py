"""
Pydantic schemas for Monte Carlo experiments and run configuration files.

``ExperimentConfig`` mirrors the bench setup: eight distinct 8-character
ASCII payloads sent as one message, 50 ms pauses, the laboratory noise mix
and an Eb/Nb sweep for single and dual thresholds. Every model forbids
unknown keys so a typo in a YAML run file is reported instead of ignored.
"""

import math
from enum import Enum
from typing import Annotated, Any, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from mppsim.config import settings
from mppsim.schemas.codec import CodecParams, Message
from mppsim.schemas.detector import AdcConfig, ThresholdMode, ThresholdPair
from mppsim.schemas.noise import NoiseConfig
from mppsim.schemas.signal import PulseShape, SlotTiming
from mppsim.utils.seeding import MAX_SEED

DEFAULT_PAYLOADS = (
    "Hello1!\n",
    "Hello2!\n",
    "Hello3!\n",
    "Hello4!\n",
    "Hello5!\n",
    "Hello6!\n",
    "Hello7!\n",
    "Hello8!\n",
)

PUBLISHED_HEADLINE_PER = 2.0e-5
PUBLISHED_HEADLINE_EB_NB_DB = 16.0


class EbNbConvention(str, Enum):
    TWENTY_LOG = "20log"  # 20 log10 of the rms voltage ratio
    TEN_LOG = "10log"


class SlotOffsetPolicy(str, Enum):
    FIXED = "fixed"
    RANDOM = "random"


class LinePhasePolicy(str, Enum):
    SEQUENTIAL = "sequential"  # messages follow each other on the time axis
    RANDOM = "random"  # plus a uniform offset within one line cycle


class PayloadFormat(str, Enum):
    ASCII = "ascii"
    HEX = "hex"


class BitTiming(BaseModel):
    """
    Bit-period bookkeeping for Eb/Nb.

    With W the detector bandwidth and B the bit period, N_b = N_0 * W * B;
    W * B is close to 1 here so Eb/Nb and Eb/N0 coincide. Nothing computes
    with ``detector_bandwidth_hz``; it is carried for the run record.
    """

    slots_per_info_bit: Annotated[float, Field(gt=0)] = 4.0
    slot_duration_s: Annotated[float, Field(gt=0)] = 3.9e-6
    detector_bandwidth_hz: Optional[Annotated[float, Field(gt=0)]] = None
    n0_units: str = "N_b = N_0 * W * B"

    model_config = ConfigDict(frozen=True, extra="forbid")

    @property
    def bit_period_s(self) -> float:
        return self.slots_per_info_bit * self.slot_duration_s

    @classmethod
    def for_codec(cls, codec: CodecParams, timing: SlotTiming) -> "BitTiming":
        return cls(
            slots_per_info_bit=codec.packet_slots / codec.message_bits,
            slot_duration_s=timing.slot_duration_s,
        )


class ExperimentConfig(BaseModel):
    """
    Everything that determines a packet-error-rate run.

    Attributes:
        payloads: One entry per packet of the message (8-character ASCII
            words, or hex strings of k bits with ``payload_format: hex``)
        thresholds: Fixed thresholds, used unless ``calibrate`` is set; the
            mode is taken from ``modes``
        signal_gain: Fixed transmitter gain; overrides the Eb/Nb sweep
        guard_slots: Noise-only slots simulated before and after a message
        rms_window_s: Length of each noise rms trace
        probe_messages: Messages per calibration probe
    """

    codec: CodecParams = CodecParams()
    timing: SlotTiming = SlotTiming()
    shape: PulseShape = PulseShape()
    noise: NoiseConfig = Field(default_factory=NoiseConfig.laboratory)
    adc: AdcConfig = AdcConfig()

    payloads: list[str] = Field(default_factory=lambda: list(DEFAULT_PAYLOADS))
    payload_format: PayloadFormat = PayloadFormat.ASCII
    inter_message_pause_s: Annotated[float, Field(ge=0)] = 0.050

    thresholds: ThresholdPair = ThresholdPair(upper=3500, lower=500)
    calibrate: bool = False
    probe_messages: Annotated[int, Field(ge=1)] = 50
    modes: list[ThresholdMode] = Field(default_factory=lambda: [ThresholdMode.DUAL, ThresholdMode.SINGLE])

    snr_grid_db: list[float] = Field(default_factory=lambda: [0.0, 4.0, 8.0, 12.0, 16.0])
    eb_nb_convention: EbNbConvention = EbNbConvention.TWENTY_LOG
    signal_gain: Optional[Annotated[float, Field(ge=0)]] = None
    repetitions: Annotated[int, Field(ge=1)] = Field(default_factory=lambda: settings.desk_repetitions)
    master_seed: Annotated[int, Field(ge=0, le=MAX_SEED)] = Field(default_factory=lambda: settings.default_seed)

    slot_offset_policy: SlotOffsetPolicy = SlotOffsetPolicy.FIXED
    slot_offset_s: Annotated[float, Field(ge=0)] = 0.0
    line_phase_policy: LinePhasePolicy = LinePhasePolicy.RANDOM
    guard_slots: Annotated[int, Field(ge=0)] = 16
    ascii_only: bool = False

    rms_window_s: Annotated[float, Field(gt=0)] = 10.0 / 60.0
    rms_traces: Annotated[int, Field(ge=1)] = 10

    reference_csv: Optional[str] = None

    model_config = ConfigDict(frozen=True, extra="forbid")

    @field_validator("snr_grid_db")
    @classmethod
    def validate_grid(cls, v: list[float]) -> list[float]:
        if not v:
            raise ValueError("the Eb/Nb grid needs at least one point")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("the Eb/Nb grid must be strictly increasing")
        return v

    @field_validator("modes")
    @classmethod
    def validate_modes(cls, v: list[ThresholdMode]) -> list[ThresholdMode]:
        if not v:
            raise ValueError("at least one threshold mode is required")
        if len(set(v)) != len(v):
            raise ValueError("threshold modes must not repeat")
        return v

    @model_validator(mode="after")
    def check_payloads(self) -> "ExperimentConfig":
        if not self.payloads:
            raise ValueError("at least one payload is required")
        messages = self.messages()
        if len(set(messages)) != len(messages):
            raise ValueError("payloads must be distinct")
        if self.slot_offset_s >= self.timing.slot_duration_s:
            raise ValueError("slot_offset_s must be shorter than one slot")
        return self

    def messages(self) -> list[Message]:
        """Payloads as k-bit messages, in send order."""
        k = self.codec.message_bits
        if self.payload_format is PayloadFormat.HEX:
            return [Message.from_hex(p, k) for p in self.payloads]
        if k != 64:
            raise ValueError("ASCII payloads need a 64-bit codec; use payload_format: hex")
        return [Message.from_ascii(p) for p in self.payloads]

    def thresholds_for(self, mode: ThresholdMode) -> ThresholdPair:
        return ThresholdPair(upper=self.thresholds.upper, lower=self.thresholds.lower, mode=mode)

    @property
    def bit_timing(self) -> BitTiming:
        return BitTiming.for_codec(self.codec, self.timing)


class PerCurvePoint(BaseModel):
    """
    Packet accounting at one Eb/Nb value for one threshold mode.

    ``per`` counts dropped packets; the ``messages_*`` columns record how
    many whole messages arrived complete, partially, or as nothing but
    wrong words. A point whose run failed carries ``error`` and no counts.
    """

    eb_nb_db: float
    threshold_mode: ThresholdMode
    packets_sent: Annotated[int, Field(ge=0)]
    packets_ok: Annotated[int, Field(ge=0)]
    packets_dropped: Annotated[int, Field(ge=0)]
    per: float
    hallucinations: Annotated[int, Field(ge=0)] = 0
    ci_low: float = math.nan
    ci_high: float = math.nan
    messages_complete: Annotated[int, Field(ge=0)] = 0
    messages_partial: Annotated[int, Field(ge=0)] = 0
    messages_corrupted: Annotated[int, Field(ge=0)] = 0
    upper: Optional[int] = None
    lower: Optional[int] = None
    error: Optional[str] = None

    @model_validator(mode="after")
    def check_accounting(self) -> "PerCurvePoint":
        if self.error is not None:
            return self
        if self.packets_ok + self.packets_dropped != self.packets_sent:
            raise ValueError("packets_ok + packets_dropped must equal packets_sent")
        if self.packets_sent == 0:
            raise ValueError("a measured point needs packets_sent > 0")
        if not math.isclose(self.per, self.packets_dropped / self.packets_sent):
            raise ValueError("per must equal packets_dropped / packets_sent")
        return self


class CostProfileRow(BaseModel):
    density: float
    trials: int
    mean_node_expansions: float
    truncated_fraction: float


class HallucinationRow(BaseModel):
    density: float
    trials: int
    measured_rate: float
    independence_estimate: float


class ReferencePoint(BaseModel):
    """A published curve point used only for side-by-side display."""

    eb_nb_db: float
    per: float
    label: str


class RunManifest(BaseModel):
    """
    Effective config, seed and component versions of one run.

    Contains nothing time-dependent, so re-running a config reproduces the
    manifest byte for byte; ``config_digest`` identifies the config.
    """

    config_digest: str
    master_seed: int
    config: dict[str, Any]
    versions: dict[str, str]
    curve_csv_path: Optional[str] = None


class OutputPaths(BaseModel):
    curve_csv: str = "per_curve.csv"
    manifest_json: Optional[str] = None  # defaults to <curve_csv stem>.manifest.json
    sweep_log_csv: str = "calibration_sweep.csv"

    model_config = ConfigDict(frozen=True, extra="forbid")


class RunConfigFile(ExperimentConfig):
    """A YAML run file: an experiment plus where its outputs go."""

    output: OutputPaths = OutputPaths()
