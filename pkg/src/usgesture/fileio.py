"""File formats: WAV, CSV, the binary frame stack and dataset manifests.

Frame-stack layout (little endian): a 16-byte header

    magic  4s   b"UGMF"
    version u16
    frame_len u16
    frame_count u32
    sample_rate u32

followed by ``frame_count * frame_len`` float64 values, frame by frame.
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from usgesture.errors import MalformedFileError, MalformedWavError, SampleRateMismatchError
from usgesture.features import RangeMatrix
from usgesture.pulse import Waveform

FRAME_MAGIC = b"UGMF"
FRAME_VERSION = 1
_HEADER = struct.Struct("<4sHHII")
MANIFEST_VERSION = 1


# -- waveforms -----------------------------------------------------------------

def write_wav(path, waveform: Waveform, fmt: str = "float32") -> None:
    """Mono WAV as 32-bit float or 16-bit PCM.

    16-bit output maps [-1, 1) to the integer range and clips beyond it.
    """
    x = waveform.samples
    if fmt == "float32":
        data = x.astype(np.float32)
    elif fmt == "int16":
        data = np.clip(np.round(x * 32768.0), -32768, 32767).astype(np.int16)
    else:
        raise ValueError(f"unknown WAV format {fmt!r}")
    wavfile.write(str(path), int(round(waveform.sample_rate_hz)), data)


def _check_riff(path) -> None:
    """Reject files whose RIFF or data chunk is shorter than declared."""
    raw = Path(path).read_bytes()
    if len(raw) < 12 or raw[:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise MalformedWavError(f"{path}: not a RIFF/WAVE file")
    declared = struct.unpack("<I", raw[4:8])[0] + 8
    if declared > len(raw):
        raise MalformedWavError(f"{path}: truncated ({len(raw)} of {declared} bytes)")
    pos = 12
    seen_fmt = False
    while pos + 8 <= len(raw):
        cid = raw[pos:pos + 4]
        size = struct.unpack("<I", raw[pos + 4:pos + 8])[0]
        if pos + 8 + size > len(raw):
            raise MalformedWavError(f"{path}: chunk {cid!r} runs past end of file")
        if cid == b"fmt ":
            seen_fmt = True
        if cid == b"data":
            if not seen_fmt:
                raise MalformedWavError(f"{path}: data chunk before fmt chunk")
            return
        pos += 8 + size + (size & 1)
    raise MalformedWavError(f"{path}: no data chunk")


def read_wav(path, expected_rate: float | None = None) -> Waveform:
    """Mono WAV as floats; integer PCM is scaled to [-1, 1)."""
    _check_riff(path)
    try:
        rate, data = wavfile.read(str(path))
    except (ValueError, EOFError) as exc:
        raise MalformedWavError(f"{path}: {exc}") from exc
    if data.ndim != 1:
        raise MalformedWavError(f"{path}: expected mono audio, got {data.shape[1]} channels")
    if data.dtype == np.int16:
        x = data.astype(float) / 32768.0
    elif data.dtype == np.int32:
        x = data.astype(float) / 2147483648.0
    elif data.dtype.kind == "f":
        x = data.astype(float)
    else:
        raise MalformedWavError(f"{path}: unsupported sample type {data.dtype}")
    if expected_rate is not None and abs(rate - expected_rate) > 1e-9:
        raise SampleRateMismatchError(f"{path}: sample rate {rate} Hz, expected {expected_rate} Hz")
    try:
        return Waveform(x, float(rate))
    except ValueError as exc:
        raise MalformedWavError(f"{path}: {exc}") from exc


def write_waveform_csv(path, waveform: Waveform) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time_s", "value"])
        fs = waveform.sample_rate_hz
        for i, v in enumerate(waveform.samples):
            w.writerow([repr(i / fs), repr(float(v))])


# -- motion frames -------------------------------------------------------------

def write_frame_stack(path, frames: np.ndarray, sample_rate_hz: float) -> None:
    frames = np.ascontiguousarray(frames, dtype="<f8")
    if frames.ndim != 2:
        raise ValueError("frame stack must be 2-D (frames x lags)")
    header = _HEADER.pack(FRAME_MAGIC, FRAME_VERSION, frames.shape[1], frames.shape[0],
                          int(round(sample_rate_hz)))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(frames.tobytes())


def read_frame_stack(path) -> tuple[np.ndarray, float]:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise MalformedFileError(f"{path}: frame stack shorter than its header")
    magic, version, frame_len, count, rate = _HEADER.unpack(raw[:_HEADER.size])
    if magic != FRAME_MAGIC or version != FRAME_VERSION:
        raise MalformedFileError(f"{path}: not a version-{FRAME_VERSION} frame stack")
    body = raw[_HEADER.size:]
    if len(body) != frame_len * count * 8:
        raise MalformedFileError(f"{path}: frame stack body has {len(body)} bytes, "
                                f"expected {frame_len * count * 8}")
    return np.frombuffer(body, dtype="<f8").reshape(count, frame_len).copy(), float(rate)


def write_frames_csv(path, frames: np.ndarray, sample_rate_hz: float) -> None:
    """Long format: one ``(block, lag_s, value)`` row per lag of every frame."""
    frames = np.atleast_2d(frames)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["block", "lag_s", "value"])
        for b, row in enumerate(frames):
            for k, v in enumerate(row):
                w.writerow([b, repr(k / sample_rate_hz), repr(float(v))])


# -- features ------------------------------------------------------------------

def write_feature_rows(path, labels, rows) -> None:
    """CSV with one row per item: label, then the values."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for label, row in zip(labels, rows):
            w.writerow([label] + [repr(float(v)) for v in np.ravel(row)])


def read_feature_rows(path) -> tuple[list[str], np.ndarray]:
    labels, rows = [], []
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if not rec:
                continue
            labels.append(rec[0])
            rows.append([float(v) for v in rec[1:]])
    if rows and len({len(r) for r in rows}) != 1:
        raise MalformedFileError(f"{path}: feature rows differ in length")
    return labels, np.array(rows, dtype=float)


def range_matrix_row(rm: RangeMatrix) -> np.ndarray:
    """Raw ``(lag, value)`` pairs interleaved frame by frame."""
    return np.stack([rm.lags.astype(float), rm.values], axis=-1).reshape(-1)


def range_matrix_from_row(row: np.ndarray, n_frames: int, frame_len: int) -> RangeMatrix:
    pairs = np.asarray(row, dtype=float).reshape(n_frames, -1, 2)
    return RangeMatrix(pairs[..., 0].astype(np.int64), pairs[..., 1].copy(), frame_len)


# -- documents -----------------------------------------------------------------

def write_json(path, data) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise MalformedFileError(f"{path}: invalid JSON ({exc})") from exc
