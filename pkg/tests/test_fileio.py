import numpy as np
import pytest

from usgesture import fileio
from usgesture.errors import MalformedFileError, MalformedWavError, SampleRateMismatchError
from usgesture.features import RangeMatrix
from usgesture.pulse import Waveform


def wave(rng, n=3840):
    return Waveform(rng.uniform(-0.9, 0.9, n), 192000.0)


def test_float_wav_round_trip(tmp_path, rng):
    w = wave(rng)
    fileio.write_wav(tmp_path / "a.wav", w)
    back = fileio.read_wav(tmp_path / "a.wav", expected_rate=192000.0)
    assert back.sample_rate_hz == 192000.0
    np.testing.assert_array_equal(back.samples, w.samples.astype(np.float32))


def test_int16_wav_round_trip(tmp_path, rng):
    w = wave(rng)
    fileio.write_wav(tmp_path / "a.wav", w, "int16")
    back = fileio.read_wav(tmp_path / "a.wav")
    assert np.max(np.abs(back.samples - w.samples)) <= 1 / 32768


def test_int16_clips(tmp_path):
    fileio.write_wav(tmp_path / "c.wav", Waveform(np.array([1.0, -1.0, 2.0]), 8000.0), "int16")
    back = fileio.read_wav(tmp_path / "c.wav").samples
    assert back[0] == 32767 / 32768 and back[1] == -1.0 and back[2] == 32767 / 32768


def test_rate_mismatch(tmp_path, rng):
    fileio.write_wav(tmp_path / "a.wav", wave(rng))
    with pytest.raises(SampleRateMismatchError):
        fileio.read_wav(tmp_path / "a.wav", expected_rate=48000.0)


@pytest.mark.parametrize("cut", [10, 44, 1000, 15000])
def test_truncated_wav_rejected(tmp_path, rng, cut):
    fileio.write_wav(tmp_path / "a.wav", wave(rng))
    raw = (tmp_path / "a.wav").read_bytes()
    (tmp_path / "b.wav").write_bytes(raw[:cut])
    with pytest.raises(MalformedWavError):
        fileio.read_wav(tmp_path / "b.wav")


def test_non_wav_rejected(tmp_path):
    (tmp_path / "x.wav").write_bytes(b"not audio at all")
    with pytest.raises(MalformedWavError):
        fileio.read_wav(tmp_path / "x.wav")


def test_frame_stack_round_trip(tmp_path, rng):
    frames = rng.random((100, 960))
    fileio.write_frame_stack(tmp_path / "f.ugmf", frames, 192000.0)
    raw = (tmp_path / "f.ugmf").read_bytes()
    assert raw[:4] == b"UGMF" and len(raw) == 16 + 100 * 960 * 8
    back, fs = fileio.read_frame_stack(tmp_path / "f.ugmf")
    np.testing.assert_array_equal(back, frames)
    assert fs == 192000.0


def test_frame_stack_corruption(tmp_path, rng):
    fileio.write_frame_stack(tmp_path / "f.ugmf", rng.random((3, 10)), 192000.0)
    raw = (tmp_path / "f.ugmf").read_bytes()
    (tmp_path / "short.ugmf").write_bytes(raw[:-8])
    (tmp_path / "magic.ugmf").write_bytes(b"XXXX" + raw[4:])
    for name in ("short.ugmf", "magic.ugmf"):
        with pytest.raises(MalformedFileError):
            fileio.read_frame_stack(tmp_path / name)


def test_feature_rows_and_range_rows(tmp_path, rng):
    rm = RangeMatrix(rng.integers(0, 960, (100, 20)), rng.random((100, 20)), 960)
    row = fileio.range_matrix_row(rm)
    assert row.shape == (4000,)
    fileio.write_feature_rows(tmp_path / "r.csv", ["fwd", "hold_hand"], [row, row * 2])
    labels, rows = fileio.read_feature_rows(tmp_path / "r.csv")
    assert labels == ["fwd", "hold_hand"]
    back = fileio.range_matrix_from_row(rows[0], 100, 960)
    np.testing.assert_array_equal(back.lags, rm.lags)
    np.testing.assert_array_equal(back.values, rm.values)


def test_ragged_feature_rows_rejected(tmp_path):
    (tmp_path / "r.csv").write_text("fwd,1,2\nfwd,1\n")
    with pytest.raises(MalformedFileError):
        fileio.read_feature_rows(tmp_path / "r.csv")


def test_frames_csv_layout(tmp_path):
    fileio.write_frames_csv(tmp_path / "f.csv", np.arange(6.0).reshape(2, 3), 1000.0)
    lines = (tmp_path / "f.csv").read_text().splitlines()
    assert lines[0] == "block,lag_s,value"
    assert lines[5] == "1,0.001,4.0"
    assert len(lines) == 7


def test_bad_json(tmp_path):
    (tmp_path / "x.json").write_text("{oops")
    with pytest.raises(MalformedFileError):
        fileio.read_json(tmp_path / "x.json")
