# Simulation logic layer
from mppsim.services.codec_service import decode_all, decode_first, encode
from mppsim.services.detector_service import calibrate_thresholds, digitize, sliding_decode, slot_stream
from mppsim.services.experiment_service import compute_eb_nb_db, run_per_curve, run_per_point
from mppsim.services.noise_service import apply_channel, fit_middleton, middleton_pdf, middleton_sample
from mppsim.services.signal_service import build_transmission, modulate, scale_signal, synthesize_pulse

__all__ = [
    "encode",
    "decode_all",
    "decode_first",
    "digitize",
    "slot_stream",
    "sliding_decode",
    "calibrate_thresholds",
    "compute_eb_nb_db",
    "run_per_point",
    "run_per_curve",
    "apply_channel",
    "fit_middleton",
    "middleton_pdf",
    "middleton_sample",
    "synthesize_pulse",
    "modulate",
    "build_transmission",
    "scale_signal",
]
