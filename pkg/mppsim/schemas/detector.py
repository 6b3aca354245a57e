"""
Pydantic schemas for the ADC threshold detector.
"""

from enum import Enum
from typing import Annotated

from pydantic import BaseModel, ConfigDict, Field, model_validator

from mppsim.schemas.codec import Message

ADC_MAX_COUNT = 4000
ADC_ZERO_COUNT = 2000

Count = Annotated[int, Field(ge=0, le=ADC_MAX_COUNT)]


class AdcConfig(BaseModel):
    """Linear ADC: full_scale_low -> 0 counts, full_scale_high -> max_count."""

    full_scale_low_volts: float = -4.0
    full_scale_high_volts: float = 4.0
    max_count: Annotated[int, Field(ge=1)] = ADC_MAX_COUNT

    model_config = ConfigDict(frozen=True, extra="forbid")

    @model_validator(mode="after")
    def check_range(self) -> "AdcConfig":
        if self.full_scale_high_volts <= self.full_scale_low_volts:
            raise ValueError("full-scale high must exceed full-scale low")
        return self


class ThresholdMode(str, Enum):
    SINGLE = "single"
    DUAL = "dual"


class ThresholdPair(BaseModel):
    """
    Mark thresholds in ADC counts.

    Single mode marks a slot when its maximum exceeds ``upper``; dual mode
    also marks it when its minimum falls below ``lower``.
    """

    upper: Count = ADC_MAX_COUNT
    lower: Count = 0
    mode: ThresholdMode = ThresholdMode.DUAL

    model_config = ConfigDict(frozen=True, extra="forbid")

    @model_validator(mode="after")
    def check_order(self) -> "ThresholdPair":
        if self.mode is ThresholdMode.DUAL and not self.lower < ADC_ZERO_COUNT < self.upper:
            raise ValueError(f"dual thresholds need lower < {ADC_ZERO_COUNT} < upper")
        return self

    def describe(self) -> str:
        return f"upper={self.upper} lower={self.lower} mode={self.mode.value}"


class SlotDecision(BaseModel):
    slot_index: int
    mark: bool
    max_count: int
    min_count: int


class DetectionEvent(BaseModel):
    """A message decoded from the n slots ending at ``end_slot_index``."""

    end_slot_index: int
    message: Message
    window_density: Annotated[float, Field(ge=0.0, le=1.0)]


class CalibrationStep(BaseModel):
    step: int
    upper: int
    lower: int
    decodes: int
    gibberish: int


class CalibrationResult(BaseModel):
    thresholds: ThresholdPair
    sweep_log: list[CalibrationStep]
