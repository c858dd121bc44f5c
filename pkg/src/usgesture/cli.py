"""Command-line entry point: synth, process, dataset, train, eval, report.

Every command writes the effective configuration (``config.json``) next to
its outputs; passing that file back with ``--config`` reproduces them.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from usgesture import fileio
from usgesture.classifier import HierarchyModel
from usgesture.config import CONFIG_ENV_VAR, RunConfig, load_config
from usgesture.dsp import motion_frames
from usgesture.errors import ConfigError, DataError, GestureError, MalformedWavError
from usgesture.evaluation import (ConfusionMatrix, FeatureSet, cross_validate, dataset_items,
                                  detection_rates, fit_hierarchy, format_table,
                                  hierarchy_trainer, read_confusion_csv, render_profile,
                                  report, sample_scene)
from usgesture.features import MotionProfile, extract_features
from usgesture.pulse import Waveform
from usgesture.simulator import GestureKind, Scene, simulate_gesture

log = logging.getLogger("usgesture")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_RUNTIME = 4

MANIFEST_NAME = "manifest.json"


def _out_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _snapshot(cfg: RunConfig, out: Path, extra: dict | None = None) -> None:
    data = cfg.to_dict()
    if extra:
        data["command"] = extra
    fileio.write_json(out / "config.json", data)


# -- synth ---------------------------------------------------------------------

def _synth_scene(cfg: RunConfig, gesture: GestureKind, seed: int) -> Scene:
    rng = np.random.default_rng(seed)
    return sample_scene(gesture, rng, cfg.dataset, cfg.pulse_train, seed)


def cmd_synth(args, cfg: RunConfig) -> int:
    if args.scene:
        scene = Scene.from_dict(fileio.read_json(args.scene))
        gesture = scene.trajectory.gesture
    else:
        gesture = GestureKind.parse(args.gesture)
        scene = _synth_scene(cfg, gesture, args.seed)
    blocks = simulate_gesture(scene, cfg.pulse_train)
    wave = Waveform(np.concatenate([b.samples for b in blocks]), cfg.pulse_train.sample_rate_hz)
    out = _out_dir(args.out)
    stem = args.name or f"{gesture.value}_seed{args.seed}"
    fileio.write_wav(out / f"{stem}.wav", wave, args.format)
    fileio.write_json(out / f"{stem}.json", {
        "label": gesture.value,
        "seed": scene.rng_seed,
        "blocks": len(blocks),
        "samples": len(wave),
        "sample_rate_hz": wave.sample_rate_hz,
        "wav_format": args.format,
        "scene": scene.to_dict(),
    })
    _snapshot(cfg, out, {"name": "synth", "gesture": gesture.value, "seed": args.seed,
                         "format": args.format})
    print(f"wrote {out / (stem + '.wav')} ({len(wave)} samples, {len(blocks)} blocks)")
    return EXIT_OK


# -- process -------------------------------------------------------------------

def process_waveform(wave: Waveform, cfg: RunConfig):
    """Blocks -> motion frames -> features for one recording."""
    pt = cfg.pulse_train
    n_blocks = len(wave) // pt.block_samples
    if n_blocks < 1:
        raise MalformedWavError(f"recording holds {len(wave)} samples, "
                                f"less than one {pt.block_samples}-sample block")
    if len(wave) % pt.block_samples:
        log.warning("dropping %d trailing samples (partial block)", len(wave) % pt.block_samples)
    blocks = wave.samples[:n_blocks * pt.block_samples].reshape(n_blocks, pt.block_samples)
    frames = motion_frames(blocks, pt, cfg.dsp.clutter_factor, cfg.dsp.gate_s)
    profile = MotionProfile(frames)
    rss, rm = extract_features(profile, cfg.features.n_peaks, cfg.features.profile_len)
    return profile, rss, rm


def cmd_process(args, cfg: RunConfig) -> int:
    wave = fileio.read_wav(args.input, expected_rate=cfg.pulse_train.sample_rate_hz)
    profile, rss, rm = process_waveform(wave, cfg)
    label = args.label or "unknown"
    frames = profile.as_array()
    out = _out_dir(args.out)
    fs = cfg.pulse_train.sample_rate_hz
    fileio.write_frame_stack(out / "frames.ugmf", frames, fs)
    if args.frames_csv:
        fileio.write_frames_csv(out / "frames.csv", frames, fs)
    fileio.write_feature_rows(out / "rss.csv", [label], [rss.values])
    fileio.write_feature_rows(out / "range.csv", [label], [fileio.range_matrix_row(rm)])
    if not args.no_figures:
        from usgesture.plotting import plot_features, plot_profile

        plot_profile(frames, out / "profile.png", fs, cfg.dsp.speed_of_sound_mps,
                     title=Path(args.input).name)
        plot_features(rss.values, rm.lags[:, 0], out / "features.png", title=Path(args.input).name)
    _snapshot(cfg, out, {"name": "process", "input": str(args.input)})
    print(f"wrote {len(profile)} motion frames of {profile.frame_len} lags to {out}")
    return EXIT_OK


# -- dataset -------------------------------------------------------------------

def cmd_dataset(args, cfg: RunConfig) -> int:
    out = _out_dir(args.out)
    pt = cfg.pulse_train
    items = dataset_items(cfg.dataset, pt)
    frame_dir = out / "frames"
    if args.save_frames:
        frame_dir.mkdir(exist_ok=True)
    labels, rss_rows, range_rows, entries = [], [], [], []
    for item in items:
        profile = render_profile(item.scene, pt, cfg.dsp.clutter_factor, cfg.dsp.gate_s)
        rss, rm = extract_features(profile, cfg.features.n_peaks, cfg.features.profile_len)
        stack = None
        if args.save_frames:
            stack = f"frames/{item.index:05d}.ugmf"
            fileio.write_frame_stack(out / stack, profile.as_array(), pt.sample_rate_hz)
        labels.append(item.label.value)
        rss_rows.append(rss.values)
        range_rows.append(fileio.range_matrix_row(rm))
        entries.append({"index": item.index, "label": item.label.value, "seed": item.seed,
                        "frame_stack": stack, "scene": item.scene.to_dict()})
        if args.verbose and (item.index + 1) % 50 == 0:
            print(f"  rendered {item.index + 1}/{len(items)}", file=sys.stderr)
    fileio.write_feature_rows(out / "rss.csv", labels, rss_rows)
    fileio.write_feature_rows(out / "range.csv", labels, range_rows)
    fileio.write_json(out / MANIFEST_NAME, {
        "version": fileio.MANIFEST_VERSION,
        "frame_len": pt.period_samples,
        "profile_len": cfg.features.profile_len,
        "n_peaks": cfg.features.n_peaks,
        "rss_csv": "rss.csv",
        "range_csv": "range.csv",
        "items": entries,
    })
    _snapshot(cfg, out, {"name": "dataset"})
    print(f"wrote {len(items)} labelled profiles to {out}")
    return EXIT_OK


def load_dataset(path) -> FeatureSet:
    """Feature set described by a dataset manifest (file or directory)."""
    p = Path(path)
    if p.is_dir():
        p = p / MANIFEST_NAME
    if not p.is_file():
        raise DataError(f"dataset manifest {p} not found")
    man = fileio.read_json(p)
    if man.get("version") != fileio.MANIFEST_VERSION:
        raise DataError(f"{p}: unsupported manifest version {man.get('version')!r}")
    base = p.parent
    rss_labels, rss = fileio.read_feature_rows(base / man["rss_csv"])
    rm_labels, rm = fileio.read_feature_rows(base / man["range_csv"])
    labels = [e["label"] for e in man["items"]]
    if rss_labels != labels or rm_labels != labels:
        raise DataError(f"{p}: feature files disagree with the manifest")
    n, length, k = len(labels), man["profile_len"], man["n_peaks"]
    if rss.shape != (n, length) or rm.shape != (n, 2 * length * k):
        raise DataError(f"{p}: feature dimensions do not match profile_len/n_peaks")
    pairs = rm.reshape(n, length, k, 2)
    return FeatureSet(rss, pairs[..., 0].astype(np.int64), pairs[..., 1].copy(),
                      [GestureKind.parse(g) for g in labels],
                      [int(e["seed"]) for e in man["items"]], int(man["frame_len"]))


# -- train / eval / report -------------------------------------------------------

def cmd_train(args, cfg: RunConfig) -> int:
    data = load_dataset(args.dataset)
    model = fit_hierarchy(data, cfg.classifier, cfg.eval)
    out = _out_dir(args.out)
    model.save(out / "model.json")
    _snapshot(cfg, out, {"name": "train", "dataset": str(args.dataset)})
    rss_X, range_X = data.node_arrays(model.config)
    pred = model.predict_arrays(rss_X, range_X)
    acc = float(np.mean([p == t for p, t in zip(pred, data.labels)]))
    print(f"trained hierarchy on {len(data)} profiles; training accuracy {acc:.4f}")
    return EXIT_OK


def cmd_eval(args, cfg: RunConfig) -> int:
    data = load_dataset(args.dataset)
    if args.model:
        mp = Path(args.model)
        if not mp.is_file():
            raise DataError(f"model file {mp} not found")
        model = HierarchyModel.load(mp)
        rss_X, range_X = data.node_arrays(model.config)
        true, pred = data.labels, model.predict_arrays(rss_X, range_X)
        cm = ConfusionMatrix.from_predictions(true, pred)
        det = detection_rates(true, pred)
    else:
        ev = cfg.eval
        res = cross_validate(data, hierarchy_trainer(cfg.classifier, ev),
                             ev.test_fraction, ev.folds, ev.split_seed)
        cm, det = res.confusion, res.detection
    out = _out_dir(args.out)
    report(cm, out, det, figure=not args.no_figures)
    _snapshot(cfg, out, {"name": "eval", "dataset": str(args.dataset),
                         "model": None if not args.model else str(args.model)})
    print(format_table(cm))
    print(f"no-gesture false accept rate: {det.false_accept:.4f}  "
          f"gesture false reject rate: {det.false_reject:.4f}")
    return EXIT_OK


def cmd_report(args, cfg: RunConfig) -> int:
    src = Path(args.results)
    counts_path = src / "confusion_counts.csv" if src.is_dir() else src
    if not counts_path.is_file():
        raise DataError(f"{counts_path} not found")
    names, rows = _read_counts(counts_path)
    by_name = {g.display_name: g for g in GestureKind}
    try:
        classes = tuple(by_name[n] for n in names)
    except KeyError as exc:
        raise DataError(f"{counts_path}: unknown class {exc}") from exc
    cm = ConfusionMatrix(np.array(rows, dtype=np.int64), classes)
    out = _out_dir(args.out or (src if src.is_dir() else src.parent))
    report(cm, out, figure=not args.no_figures)
    print(format_table(cm))
    return EXIT_OK


def _read_counts(path):
    names, rows = read_confusion_csv(path)
    try:
        return names, [[int(v) for v in r] for r in rows]
    except ValueError as exc:
        raise DataError(f"{path}: counts must be integers") from exc


# -- argument parsing ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="usgesture", description=__doc__.splitlines()[0])
    p.add_argument("--config", help=f"JSON config file (default: ${CONFIG_ENV_VAR})")
    p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                   help="override one config key (value parsed as JSON)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="render a gesture recording to WAV")
    s.add_argument("--gesture", default="fwd")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--scene", help="explicit scene JSON instead of a sampled one")
    s.add_argument("--format", choices=("float32", "int16"), default="float32")
    s.add_argument("--name", help="output file stem")
    s.add_argument("--out", default=".")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("process", help="motion frames and features of a WAV recording")
    s.add_argument("input")
    s.add_argument("--out", required=True)
    s.add_argument("--label")
    s.add_argument("--frames-csv", action="store_true")
    s.add_argument("--no-figures", action="store_true")
    s.set_defaults(func=cmd_process)

    s = sub.add_parser("dataset", help="render a labelled synthetic dataset")
    s.add_argument("--out", required=True)
    s.add_argument("--save-frames", action="store_true")
    s.set_defaults(func=cmd_dataset)

    s = sub.add_parser("train", help="train the classification hierarchy")
    s.add_argument("--dataset", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("eval", help="cross-validate, or score a trained model")
    s.add_argument("--dataset", required=True)
    s.add_argument("--model")
    s.add_argument("--out", required=True)
    s.add_argument("--no-figures", action="store_true")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("report", help="re-render tables and figures from confusion counts")
    s.add_argument("results", help="results directory or confusion_counts.csv")
    s.add_argument("--out")
    s.add_argument("--no-figures", action="store_true")
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config, args.set)
        return args.func(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (GestureError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
