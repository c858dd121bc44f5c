import json

import numpy as np
import pytest

from usgesture import fileio
from usgesture.cli import EXIT_CONFIG, EXIT_DATA, main
from usgesture.config import RunConfig, load_config
from usgesture.errors import InvalidConfigError
from usgesture.pulse import Waveform

MINI = ["--set", "dataset.repetitions_per_gesture=10", "--set", "dataset.noise_std=0",
        "--set", "dataset.jitter=0.5"]


def run(*argv):
    return main([str(a) for a in argv])


def test_synth_is_deterministic(tmp_path):
    assert run("synth", "--gesture", "fwd", "--seed", 7, "--out", tmp_path / "a") == 0
    assert run("synth", "--gesture", "fwd", "--seed", 7, "--out", tmp_path / "b") == 0
    a = (tmp_path / "a" / "fwd_seed7.wav").read_bytes()
    assert a == (tmp_path / "b" / "fwd_seed7.wav").read_bytes()
    w = fileio.read_wav(tmp_path / "a" / "fwd_seed7.wav")
    assert len(w) == 384000
    meta = json.loads((tmp_path / "a" / "fwd_seed7.json").read_text())
    assert meta["label"] == "fwd" and meta["blocks"] == 100


def test_synth_no_gesture(tmp_path):
    assert run("synth", "--gesture", "no_gesture", "--seed", 1, "--out", tmp_path) == 0
    meta = json.loads((tmp_path / "no_gesture_seed1.json").read_text())
    assert meta["scene"]["trajectory"]["gesture"] == "no_gesture"


def test_synth_from_scene_file(tmp_path):
    run("synth", "--gesture", "swipe_rtl", "--seed", 3, "--out", tmp_path / "a")
    scene = json.loads((tmp_path / "a" / "swipe_rtl_seed3.json").read_text())["scene"]
    fileio.write_json(tmp_path / "scene.json", scene)
    assert run("synth", "--scene", tmp_path / "scene.json", "--seed", 3,
               "--out", tmp_path / "b") == 0
    assert ((tmp_path / "a" / "swipe_rtl_seed3.wav").read_bytes()
            == (tmp_path / "b" / "swipe_rtl_seed3.wav").read_bytes())


def test_process_synth_output(tmp_path):
    run("synth", "--gesture", "hold_hand", "--seed", 2, "--format", "int16", "--out", tmp_path)
    assert run("process", tmp_path / "hold_hand_seed2.wav", "--out", tmp_path / "p",
               "--label", "hold_hand", "--frames-csv") == 0
    frames, fs = fileio.read_frame_stack(tmp_path / "p" / "frames.ugmf")
    assert frames.shape == (100, 960) and fs == 192000
    labels, rss = fileio.read_feature_rows(tmp_path / "p" / "rss.csv")
    assert labels == ["hold_hand"] and rss.shape == (1, 100)
    _, rm = fileio.read_feature_rows(tmp_path / "p" / "range.csv")
    assert rm.shape == (1, 4000)
    for name in ("profile.png", "features.png", "frames.csv", "config.json"):
        assert (tmp_path / "p" / name).is_file()


def test_process_silence_gives_zero_features(tmp_path):
    fileio.write_wav(tmp_path / "quiet.wav", Waveform(np.zeros(384000), 192000.0))
    assert run("process", tmp_path / "quiet.wav", "--out", tmp_path / "p", "--no-figures") == 0
    _, rss = fileio.read_feature_rows(tmp_path / "p" / "rss.csv")
    _, rm = fileio.read_feature_rows(tmp_path / "p" / "range.csv")
    assert not np.any(rss) and not np.any(rm)


def test_process_truncated_wav_fails_cleanly(tmp_path, capsys):
    run("synth", "--gesture", "fwd", "--seed", 1, "--out", tmp_path)
    raw = (tmp_path / "fwd_seed1.wav").read_bytes()
    (tmp_path / "cut.wav").write_bytes(raw[: len(raw) // 2])
    out = tmp_path / "p"
    assert run("process", tmp_path / "cut.wav", "--out", out) == EXIT_DATA
    assert not out.exists()
    assert "truncated" in capsys.readouterr().err


def test_process_rate_mismatch(tmp_path):
    fileio.write_wav(tmp_path / "a.wav", Waveform(np.zeros(48000), 48000.0))
    assert run("process", tmp_path / "a.wav", "--out", tmp_path / "p") == EXIT_DATA


def test_missing_model_is_clean_error(tmp_path, capsys):
    assert run(*MINI, "--set", "dataset.repetitions_per_gesture=2", "dataset",
               "--out", tmp_path / "ds") == 0
    code = run("eval", "--dataset", tmp_path / "ds", "--model", tmp_path / "none.json",
               "--out", tmp_path / "e")
    assert code == EXIT_DATA
    assert "not found" in capsys.readouterr().err


def test_bad_config_exit_code(tmp_path):
    assert run("--set", "dsp.clutter_factor=2", "synth", "--out", tmp_path) == EXIT_CONFIG
    assert run("--set", "nosuch.key=1", "synth", "--out", tmp_path) == EXIT_CONFIG
    assert run("--config", tmp_path / "missing.json", "synth", "--out", tmp_path) == EXIT_CONFIG


@pytest.mark.slow
def test_train_then_eval_noiseless_overfits(tmp_path):
    assert run(*MINI, "dataset", "--out", tmp_path / "ds", "--save-frames") == 0
    manifest = json.loads((tmp_path / "ds" / "manifest.json").read_text())
    assert len(manifest["items"]) == 60
    first = manifest["items"][0]["frame_stack"]
    assert fileio.read_frame_stack(tmp_path / "ds" / first)[0].shape == (100, 960)
    assert run("train", "--dataset", tmp_path / "ds", "--out", tmp_path / "m") == 0
    assert run("eval", "--dataset", tmp_path / "ds", "--model", tmp_path / "m" / "model.json",
               "--out", tmp_path / "e") == 0
    metrics = json.loads((tmp_path / "e" / "metrics.json").read_text())
    assert metrics["average_accuracy"] == 1.0
    assert metrics["detection"]["false_accept_rate"] == 0.0
    assert len((tmp_path / "e" / "confusion.csv").read_text().splitlines()) == 6
    assert run("report", tmp_path / "e", "--out", tmp_path / "r") == 0
    assert (tmp_path / "r" / "confusion.png").is_file()


def test_config_snapshot_reproduces_outputs(tmp_path):
    args = ["--set", "dataset.snr_db=10", "--set", "dsp.clutter_factor=0.7"]
    assert run(*args, "synth", "--gesture", "swipe_ltr", "--seed", 5,
               "--out", tmp_path / "a") == 0
    assert run(*args, "process", tmp_path / "a" / "swipe_ltr_seed5.wav",
               "--out", tmp_path / "p1") == 0
    snap = tmp_path / "p1" / "config.json"
    assert run("--config", snap, "process", tmp_path / "a" / "swipe_ltr_seed5.wav",
               "--out", tmp_path / "p2") == 0
    for name in ("frames.ugmf", "rss.csv", "range.csv", "profile.png", "features.png"):
        assert (tmp_path / "p1" / name).read_bytes() == (tmp_path / "p2" / name).read_bytes()


def test_config_overrides_and_env(tmp_path, monkeypatch):
    cfg = load_config(None, ["classifier.gamma=100", "eval.grid_degrees=[2]"])
    assert cfg.classifier.gamma == 100 and cfg.eval.grid_degrees == (2,)
    assert cfg.dataset.clutter_factor == cfg.dsp.clutter_factor
    fileio.write_json(tmp_path / "c.json", {"schema_version": 1, "dsp": {"clutter_factor": 0.5}})
    monkeypatch.setenv("USGESTURE_CONFIG", str(tmp_path / "c.json"))
    cfg = load_config()
    assert cfg.dsp.clutter_factor == 0.5 and cfg.dataset.clutter_factor == 0.5
    assert RunConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(InvalidConfigError):
        RunConfig.from_dict({"schema_version": 2})
    with pytest.raises(InvalidConfigError):
        RunConfig.from_dict({"dsp": {"bogus": 1}})
