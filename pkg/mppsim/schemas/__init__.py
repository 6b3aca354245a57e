# Pydantic schemas for domain types and run configuration
from mppsim.schemas.codec import CodecParams, Codeword, DecodeReport, Message, Packet
from mppsim.schemas.detector import (
    AdcConfig,
    CalibrationResult,
    CalibrationStep,
    DetectionEvent,
    SlotDecision,
    ThresholdMode,
    ThresholdPair,
)
from mppsim.schemas.experiment import (
    BitTiming,
    ExperimentConfig,
    PerCurvePoint,
    RunConfigFile,
    RunManifest,
)
from mppsim.schemas.noise import (
    HarmonicNoiseConfig,
    ImpulseTrainConfig,
    MiddletonFit,
    MiddletonParams,
    NoiseConfig,
)
from mppsim.schemas.signal import PulseShape, SlotTiming, TransmissionPlan, Waveform

__all__ = [
    "CodecParams",
    "Codeword",
    "DecodeReport",
    "Message",
    "Packet",
    "AdcConfig",
    "CalibrationResult",
    "CalibrationStep",
    "DetectionEvent",
    "SlotDecision",
    "ThresholdMode",
    "ThresholdPair",
    "BitTiming",
    "ExperimentConfig",
    "PerCurvePoint",
    "RunConfigFile",
    "RunManifest",
    "HarmonicNoiseConfig",
    "ImpulseTrainConfig",
    "MiddletonFit",
    "MiddletonParams",
    "NoiseConfig",
    "PulseShape",
    "SlotTiming",
    "TransmissionPlan",
    "Waveform",
]
