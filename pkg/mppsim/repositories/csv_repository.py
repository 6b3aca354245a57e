"""
File I/O for waveforms, detector dumps and experiment tables.

Every CSV is written with ``\\n`` line endings and ``.`` decimals so that a
rerun with the same seed reproduces the file byte for byte. Raw waveforms
go to a little-endian binary file (sample count, then float64 samples) with
a JSON sidecar carrying the sample rate.
"""

import csv
import json
from pathlib import Path
from typing import IO, Iterable, Sequence, Union

import numpy as np
from pydantic import BaseModel

from mppsim.exceptions import ParameterError
from mppsim.schemas.detector import CalibrationStep, DetectionEvent, SlotDecision
from mppsim.schemas.experiment import PerCurvePoint, ReferencePoint
from mppsim.schemas.signal import Waveform, WaveformHeader

PathLike = Union[str, Path]

WAVEFORM_HEADER = ["time_s", "volts"]
DECISION_HEADER = ["slot_index", "mark", "max_count", "min_count"]
EVENT_HEADER = ["end_slot", "message_hex", "window_density"]
SWEEP_HEADER = ["step", "upper", "lower", "decodes", "gibberish"]
CURVE_HEADER = [
    "eb_nb_db",
    "threshold_mode",
    "packets_sent",
    "packets_ok",
    "packets_dropped",
    "per",
    "hallucinations",
    "ci_low",
    "ci_high",
    "messages_complete",
    "messages_partial",
    "messages_corrupted",
    "upper",
    "lower",
    "error",
]
REFERENCE_HEADER = ["eb_nb_db", "per", "label"]


def _format(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(float(value))
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def write_rows(
    stream: IO[str],
    header: Sequence[str],
    rows: Iterable[Union[dict, BaseModel]],
) -> None:
    """Write dicts or models as CSV; missing keys become empty cells."""
    writer = csv.DictWriter(stream, fieldnames=list(header), lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        data = row.model_dump() if isinstance(row, BaseModel) else row
        writer.writerow({key: _format(data.get(key)) for key in header})


def write_table(path: PathLike, header: Sequence[str], rows: Iterable[Union[dict, BaseModel]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as stream:
        write_rows(stream, header, rows)
    return path


# ---------------------------------------------------------------------------
# Waveforms
# ---------------------------------------------------------------------------

def write_waveform_csv(waveform: Waveform, path: PathLike) -> Path:
    """Write ``time_s,volts`` rows, one per sample, at full float64 precision."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(
        path,
        np.column_stack([waveform.times(), waveform.samples]),
        fmt="%.17g",
        delimiter=",",
        newline="\n",
        header=",".join(WAVEFORM_HEADER),
        comments="",
        encoding="utf-8",
    )
    return path


def read_waveform_csv(path: PathLike) -> Waveform:
    """
    Read a ``time_s,volts`` CSV back into a waveform.

    The sample rate is recovered from the median time step.

    Raises:
        ParameterError: If the file has fewer than two samples
    """
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[0] < 2 or data.shape[1] != 2:
        raise ParameterError(f"{path}: expected at least two time_s,volts rows")
    step = float(np.median(np.diff(data[:, 0])))
    if step <= 0:
        raise ParameterError(f"{path}: time column must increase")
    return Waveform(samples=data[:, 1], sample_rate_hz=1.0 / step, origin_time_s=float(data[0, 0]))


def sidecar_path(path: PathLike) -> Path:
    return Path(path).with_suffix(".json")


def write_waveform_binary(waveform: Waveform, path: PathLike) -> Path:
    """
    Write an 8-byte little-endian sample count followed by float64 samples,
    plus a JSON sidecar with the sample rate and origin.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as stream:
        stream.write(np.uint64(len(waveform)).astype("<u8").tobytes())
        stream.write(waveform.samples.astype("<f8").tobytes())
    header = WaveformHeader(
        sample_rate_hz=waveform.sample_rate_hz,
        origin_time_s=waveform.origin_time_s,
        count=len(waveform),
    )
    sidecar_path(path).write_text(header.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path


def read_waveform_binary(path: PathLike) -> Waveform:
    """
    Raises:
        ParameterError: If the sample count disagrees with the file size
            or the sidecar
    """
    raw = Path(path).read_bytes()
    header = WaveformHeader.model_validate_json(sidecar_path(path).read_text(encoding="utf-8"))
    count = int(np.frombuffer(raw[:8], dtype="<u8")[0])
    samples = np.frombuffer(raw[8:], dtype="<f8")
    if samples.size != count or count != header.count:
        raise ParameterError(f"{path}: sample count {count} does not match the data")
    return Waveform(samples=samples.astype(np.float64), sample_rate_hz=header.sample_rate_hz,
                    origin_time_s=header.origin_time_s)


def read_noise_samples(path: PathLike) -> np.ndarray:
    """
    Read noise samples from a CSV with a header row.

    The last column holds the values, so both ``time_s,volts`` files from
    ``gen-noise`` and single-column captures are accepted.
    """
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, -1].astype(np.float64)


# ---------------------------------------------------------------------------
# Detector and experiment tables
# ---------------------------------------------------------------------------

def write_decisions_csv(decisions: Iterable[SlotDecision], path: PathLike) -> Path:
    return write_table(path, DECISION_HEADER, decisions)


def write_events_csv(events: Iterable[DetectionEvent], path: PathLike) -> Path:
    rows = (
        {
            "end_slot": e.end_slot_index,
            "message_hex": e.message.to_hex(),
            "window_density": e.window_density,
        }
        for e in events
    )
    return write_table(path, EVENT_HEADER, rows)


def write_sweep_csv(steps: Iterable[CalibrationStep], path: PathLike) -> Path:
    return write_table(path, SWEEP_HEADER, steps)


def write_curve_csv(points: Iterable[PerCurvePoint], path: PathLike) -> Path:
    return write_table(path, CURVE_HEADER, points)


def write_json(model: BaseModel, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(model.model_dump(mode="json"), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_reference_csv(path: PathLike) -> list[ReferencePoint]:
    """
    Read published ``eb_nb_db,per,label`` points for side-by-side display.

    Raises:
        ParameterError: If the header is missing a required column
    """
    with Path(path).open("r", encoding="utf-8", newline="") as stream:
        reader = csv.DictReader(stream)
        missing = set(REFERENCE_HEADER) - set(reader.fieldnames or [])
        if missing:
            raise ParameterError(f"{path}: missing columns {sorted(missing)}")
        return [
            ReferencePoint(eb_nb_db=float(row["eb_nb_db"]), per=float(row["per"]), label=row["label"])
            for row in reader
        ]
