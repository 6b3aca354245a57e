"""
Pydantic schemas for the power-line noise channel.

Defaults reproduce the measured laboratory line: 60 Hz harmonics of about
1.6 V, a line-locked 7 kHz train of 1 us / 2.2 V impulses, an asynchronous
10 kHz train of 0.5 us / 3.2 V impulses in 11 ms bursts, and Middleton
Class A statistics with A = 0.305, Gamma = 0.046.
"""

from enum import Enum
from typing import Annotated, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

PositiveFloat = Annotated[float, Field(gt=0)]


class MiddletonParams(BaseModel):
    """
    Middleton Class A parameters.

    Attributes:
        A: Impulsive index
        Gamma: Gaussian-to-impulsive power ratio
        sigma_total: Total rms in volts (1.0 for normalized noise)
        terms: Number of Poisson terms kept by the pdf
    """

    A: PositiveFloat = 0.305
    Gamma: PositiveFloat = 0.046
    sigma_total: PositiveFloat = 1.0
    terms: Annotated[int, Field(ge=1)] = 3

    model_config = ConfigDict(frozen=True, extra="forbid")


class HarmonicNoiseConfig(BaseModel):
    """Equal-amplitude harmonics of the line frequency, scaled to a peak voltage."""

    fundamental_hz: PositiveFloat = 60.0
    lowest_harmonic: Annotated[int, Field(ge=1)] = 3
    highest_harmonic: Annotated[int, Field(ge=1)] = 16
    total_peak_volts: PositiveFloat = 1.6
    phases: Optional[tuple[float, ...]] = None

    model_config = ConfigDict(frozen=True, extra="forbid")

    @model_validator(mode="after")
    def check_harmonics(self) -> "HarmonicNoiseConfig":
        if self.highest_harmonic < self.lowest_harmonic:
            raise ValueError("highest_harmonic must not be below lowest_harmonic")
        count = self.highest_harmonic - self.lowest_harmonic + 1
        if self.phases is not None and len(self.phases) != count:
            raise ValueError(f"expected {count} phases, got {len(self.phases)}")
        return self

    @property
    def harmonic_numbers(self) -> range:
        return range(self.lowest_harmonic, self.highest_harmonic + 1)

    @property
    def phase_offsets(self) -> tuple[float, ...]:
        if self.phases is None:
            return (0.0,) * len(self.harmonic_numbers)
        return self.phases


class BurstSpacing(str, Enum):
    GAP = "gap"  # off-time between bursts
    PERIOD = "period"  # start-to-start distance


class Polarity(str, Enum):
    FIXED_POSITIVE = "fixed-positive"
    ALTERNATING = "alternating"
    RANDOM = "random"


class ImpulseTrainConfig(BaseModel):
    """
    A train of rectangular impulses, optionally line-locked and burst-gated.

    Line-locked trains restart at every line cycle, so they repeat exactly
    every 1/60 s. Asynchronous trains start at a random phase.
    """

    pulse_rate_hz: PositiveFloat
    pulse_width_s: PositiveFloat
    amplitude_volts: PositiveFloat
    line_locked: bool = False
    line_frequency_hz: PositiveFloat = 60.0
    burst_on_s: Optional[PositiveFloat] = None
    burst_gap_s: Optional[PositiveFloat] = None
    burst_spacing: BurstSpacing = BurstSpacing.GAP
    polarity: Polarity = Polarity.FIXED_POSITIVE

    model_config = ConfigDict(frozen=True, extra="forbid")

    @model_validator(mode="after")
    def check_timing(self) -> "ImpulseTrainConfig":
        if self.pulse_width_s >= 1.0 / self.pulse_rate_hz:
            raise ValueError("pulse width must be shorter than the pulse period")
        if (self.burst_on_s is None) != (self.burst_gap_s is None):
            raise ValueError("burst_on_s and burst_gap_s are set together")
        if self.is_bursty and self.burst_period_s <= self.burst_on_s:
            raise ValueError("burst period must exceed the burst on-time")
        return self

    @property
    def is_bursty(self) -> bool:
        return self.burst_on_s is not None

    @property
    def burst_period_s(self) -> float:
        if self.burst_spacing is BurstSpacing.PERIOD:
            return self.burst_gap_s
        return self.burst_on_s + self.burst_gap_s

    @classmethod
    def line_locked_preset(cls) -> "ImpulseTrainConfig":
        """7 kHz, 1 us, 2.2 V impulses locked to the line."""
        return cls(pulse_rate_hz=7000.0, pulse_width_s=1.0e-6, amplitude_volts=2.2, line_locked=True)

    @classmethod
    def asynchronous_preset(cls) -> "ImpulseTrainConfig":
        """10 kHz, 0.5 us, 3.2 V impulses in 11 ms bursts with 25 ms gaps."""
        return cls(
            pulse_rate_hz=10000.0,
            pulse_width_s=0.5e-6,
            amplitude_volts=3.2,
            burst_on_s=0.011,
            burst_gap_s=0.025,
        )


class NoiseConfig(BaseModel):
    """
    Additive channel noise.

    Every component is optional; a config with none enabled is a noiseless
    channel. ``dc_offset_volts`` shifts the whole line and exists for
    erasure experiments.
    """

    middleton: Optional[MiddletonParams] = None
    harmonics: Optional[HarmonicNoiseConfig] = None
    impulse_trains: tuple[ImpulseTrainConfig, ...] = ()
    awgn_rms_volts: Annotated[float, Field(ge=0)] = 0.0
    dc_offset_volts: float = 0.0

    model_config = ConfigDict(frozen=True, extra="forbid")

    @property
    def is_silent(self) -> bool:
        return (
            self.middleton is None
            and self.harmonics is None
            and not self.impulse_trains
            and self.awgn_rms_volts == 0.0
            and self.dc_offset_volts == 0.0
        )

    @classmethod
    def laboratory(cls, middleton_sigma_volts: float = 0.3) -> "NoiseConfig":
        """All three measured components plus Class A background noise."""
        return cls(
            middleton=MiddletonParams(sigma_total=middleton_sigma_volts),
            harmonics=HarmonicNoiseConfig(),
            impulse_trains=(
                ImpulseTrainConfig.line_locked_preset(),
                ImpulseTrainConfig.asynchronous_preset(),
            ),
        )


class MiddletonFit(BaseModel):
    """Result of fitting Class A parameters to normalized samples."""

    A: float
    Gamma: float
    residual: float
    terms: int

    def summary(self) -> str:
        return f"A={self.A:.6g} Gamma={self.Gamma:.6g} residual={self.residual:.6g}"
