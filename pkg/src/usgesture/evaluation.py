"""Synthetic datasets, stratified hold-out evaluation and confusion reports."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Sequence

import numpy as np

from usgesture.classifier import (NODES, HierarchyConfig, HierarchyModel,
                                  node_inputs, train_hierarchy)
from usgesture.dsp import DEFAULT_CLUTTER_FACTOR, DEFAULT_GATE_S, motion_frames
from usgesture.errors import ClassMissingError, InvalidConfigError
from usgesture.features import (N_PEAKS, PROFILE_LEN, MotionProfile, RangeMatrix,
                                RssVector, extract_features)
from usgesture.pulse import PulseTrainConfig, chirp_samples
from usgesture.simulator import (DEPTH_RANGE_M, GESTURES, LATERAL_RANGE_M, GestureKind,
                                 Scene, Trajectory, simulate_gesture)

# Row/column order of the reported confusion matrix.
CLASS_ORDER = (GestureKind.SWIPE_RTL, GestureKind.SWIPE_LTR, GestureKind.HOLD_HAND,
               GestureKind.FWD_BWD, GestureKind.FWD)

# Hardware-measured reference confusion matrix in CLASS_ORDER (rows = true class).
REFERENCE_CONFUSION = (
    ("0.9423", "0.0385", "0", "0", "0"),
    ("0.0088", "0.9381", "0.0885", "0", "0"),
    ("0.0309", "0.2165", "0.8247", "0", "0.0103"),
    ("0.0085", "0.0169", "0.1356", "0.8136", "0.1017"),
    ("0", "0.0545", "0.0545", "0.0273", "0.9182"),
)
REFERENCE_ACCURACY = 0.887


@dataclass(frozen=True)
class DatasetSpec:
    """What to render: repetitions, jitter ranges and the master seed.

    ``snr_db`` fixes ``noise_std`` through :func:`calibrate_noise_std` unless
    ``noise_std`` is given explicitly.  ``jitter`` scales every randomised
    trajectory and environment range; 0 renders the nominal scene each time.
    """

    repetitions_per_gesture: int = 120
    include_no_gesture: bool = True
    no_gesture_repetitions: int | None = None
    noise_std: float | None = None
    snr_db: float = 15.0
    jitter: float = 1.0
    master_seed: int = 2024
    duration_s: float = 2.0
    reflection_coeff: float = 0.01
    reflection_spread: float = 0.3
    speed_range_mps: tuple[float, float] = (0.5, 0.95)
    swipe_tilt_range: tuple[float, float] = (0.15, 0.35)
    hold_fraction_range: tuple[float, float] = (0.25, 0.45)
    onset_jitter_s: float = 0.15
    self_interference_range: tuple[float, float] = (0.3, 0.7)
    clutter_count_range: tuple[int, int] = (1, 3)
    clutter_gain_range: tuple[float, float] = (0.005, 0.03)
    multipath_gain_range: tuple[float, float] = (0.1, 0.3)
    rss_jitter: float = 0.05
    clutter_factor: float = DEFAULT_CLUTTER_FACTOR
    gate_s: tuple[float, float] = DEFAULT_GATE_S

    def __post_init__(self):
        if self.repetitions_per_gesture < 1:
            raise InvalidConfigError("repetitions_per_gesture must be >= 1")
        if self.noise_std is not None and self.noise_std < 0:
            raise InvalidConfigError("noise_std must be non-negative")
        if not 0 <= self.jitter <= 1:
            raise InvalidConfigError("jitter must lie in [0, 1]")
        for name in ("speed_range_mps", "swipe_tilt_range", "hold_fraction_range",
                     "self_interference_range", "clutter_count_range",
                     "clutter_gain_range", "multipath_gain_range", "gate_s"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise InvalidConfigError(f"{name} must be an increasing (low, high) pair")
            object.__setattr__(self, name, (lo, hi))
        if self.speed_range_mps[1] > 1.0 or self.speed_range_mps[0] <= 0:
            raise InvalidConfigError("speed_range_mps must lie in (0, 1]")

    @property
    def classes(self) -> tuple[GestureKind, ...]:
        extra = (GestureKind.NO_GESTURE,) if self.include_no_gesture else ()
        return GESTURES + extra

    def repetitions(self, gesture: GestureKind) -> int:
        if gesture is GestureKind.NO_GESTURE and self.no_gesture_repetitions is not None:
            return self.no_gesture_repetitions
        return self.repetitions_per_gesture

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}

    @classmethod
    def from_dict(cls, data: dict) -> DatasetSpec:
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidConfigError(f"unknown dataset keys: {sorted(unknown)}")
        return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in data.items()})


def calibrate_noise_std(config: PulseTrainConfig, snr_db: float, depth_m: float = 0.30,
                        reflection_coeff: float = 0.01) -> float:
    """Noise level giving ``snr_db`` peak-to-RMS on a summed correlation frame.

    The peak is ``N * alpha * E`` for a hand at ``depth_m`` (chirp energy
    ``E``).  For white noise each per-pulse correlation value is
    ``N(0, sigma**2 E)``, so the summed magnitude of ``N`` of them has RMS
    ``sigma * sqrt(E * (N + N (N - 1) * 2 / pi))``.
    """
    n = config.pulses_per_block
    energy = float(np.sum(chirp_samples(config, "up") ** 2))
    alpha = reflection_coeff / depth_m ** 2
    peak = n * alpha * energy
    rms_per_sigma = math.sqrt(energy * (n + n * (n - 1) * 2 / math.pi))
    return peak / (10 ** (snr_db / 20) * rms_per_sigma)


def _u(rng: np.random.Generator, lo: float, hi: float, jitter: float) -> float:
    """Uniform draw on [lo, hi] shrunk about its centre by ``jitter``."""
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo) * jitter
    return float(mid + half * (2 * rng.random() - 1))


def _clip_box(depth: float, lateral: float) -> tuple[float, float]:
    return (float(np.clip(depth, *DEPTH_RANGE_M)), float(np.clip(lateral, *LATERAL_RANGE_M)))


def sample_trajectory(gesture: GestureKind, rng: np.random.Generator,
                      spec: DatasetSpec) -> Trajectory:
    """Draw a randomised trajectory of one gesture kind."""
    g = GestureKind.parse(gesture)
    j = spec.jitter
    dur = spec.duration_s
    if g is GestureKind.NO_GESTURE:
        return Trajectory(g, dur)
    speed = _u(rng, *spec.speed_range_mps, j)
    hold = 0.0
    if g in (GestureKind.FWD, GestureKind.FWD_BWD):
        lat = _u(rng, -0.05, 0.05, j)
        start = _clip_box(_u(rng, 0.38, 0.48, j), lat)
        end = _clip_box(_u(rng, 0.12, 0.22, j), lat + _u(rng, -0.03, 0.03, j))
        if g is GestureKind.FWD_BWD:
            hold = _u(rng, 0.0, 0.08, j)
    elif g in (GestureKind.SWIPE_LTR, GestureKind.SWIPE_RTL):
        # The sweep is slanted in depth (a fixed arm pivot); a straight
        # constant-depth sweep is mirror-symmetric in round-trip range, which
        # would make the two directions indistinguishable.
        centre = _u(rng, 0.24, 0.36, j)
        tilt = _u(rng, *spec.swipe_tilt_range, j)
        left = -_u(rng, 0.15, 0.19, j)
        right = _u(rng, 0.15, 0.19, j)
        a = _clip_box(centre + tilt * left, left)
        b = _clip_box(centre + tilt * right, right)
        start, end = (a, b) if g is GestureKind.SWIPE_LTR else (b, a)
    else:
        side = 1.0 if rng.random() < 0.5 else -1.0
        depth = _u(rng, 0.2, 0.4, j)
        start = _clip_box(depth, side * _u(rng, 0.15, 0.19, j))
        end = _clip_box(depth + _u(rng, -0.02, 0.02, j), _u(rng, -0.03, 0.03, j))
        hold = _u(rng, *spec.hold_fraction_range, j)

    dist = math.dist(start, end)
    moves = 2 if g in (GestureKind.FWD_BWD, GestureKind.HOLD_HAND) else 1
    budget = dur - 0.2 - hold * dur  # leave 0.1 s of margin at each end
    min_speed = moves * math.pi * dist / (2 * budget)
    speed = min(max(speed, min_speed), 1.0)
    motion = moves * math.pi * dist / (2 * speed) + hold * dur
    # Recordings are segmented around the gesture: motion is centred in the
    # window up to a random shift.
    slack = max(dur - motion - 0.2, 0.0)
    shift = _u(rng, -spec.onset_jitter_s, spec.onset_jitter_s, j)
    onset = 0.1 + float(np.clip(slack / 2 + shift, 0.0, slack))
    return Trajectory(g, dur, start, end, speed, onset, hold)


def sample_scene(gesture: GestureKind, rng: np.random.Generator, spec: DatasetSpec,
                 config: PulseTrainConfig, seed: int) -> Scene:
    """Randomised scene (trajectory plus environment) for one recording."""
    j = spec.jitter
    traj = sample_trajectory(gesture, rng, spec)
    spread = spec.reflection_spread
    coeff = spec.reflection_coeff * _u(rng, 1 - spread, 1 + spread, j)
    n_clutter = int(round(_u(rng, *spec.clutter_count_range, j)))
    clutter = tuple((_u(rng, 0.1, 0.6, j), _u(rng, *spec.clutter_gain_range, j))
                    for _ in range(n_clutter))
    multipath = ((_u(rng, 0.3e-3, 1.0e-3, j), _u(rng, *spec.multipath_gain_range, j)),)
    noise = spec.noise_std
    if noise is None:
        noise = calibrate_noise_std(config, spec.snr_db, reflection_coeff=spec.reflection_coeff)
    return Scene(traj, reflection_coeff=min(coeff, 1.0),
                 self_interference_gain=_u(rng, *spec.self_interference_range, j),
                 static_clutter=clutter, multipath=multipath, noise_std=noise,
                 rng_seed=seed, rss_jitter=spec.rss_jitter * j)


@dataclass(frozen=True)
class DatasetItem:
    index: int
    label: GestureKind
    seed: int
    scene: Scene


def dataset_items(spec: DatasetSpec, config: PulseTrainConfig) -> list[DatasetItem]:
    """Scene of every recording; each draws from its own spawned seed."""
    plan = [(g, r) for g in spec.classes for r in range(spec.repetitions(g))]
    children = np.random.SeedSequence(spec.master_seed).spawn(len(plan))
    items = []
    for i, ((g, _), child) in enumerate(zip(plan, children)):
        rng = np.random.default_rng(child)
        seed = int(child.generate_state(1, dtype=np.uint32)[0])
        items.append(DatasetItem(i, g, seed, sample_scene(g, rng, spec, config, seed)))
    return items


def render_profile(scene: Scene, config: PulseTrainConfig,
                   clutter_factor: float = DEFAULT_CLUTTER_FACTOR,
                   gate_s=DEFAULT_GATE_S) -> MotionProfile:
    blocks = simulate_gesture(scene, config)
    frames = motion_frames(blocks, config, clutter_factor, gate_s)
    return MotionProfile(frames, scene.trajectory.gesture)


def iter_dataset(spec: DatasetSpec, config: PulseTrainConfig
                 ) -> Iterator[tuple[MotionProfile, GestureKind]]:
    for item in dataset_items(spec, config):
        yield render_profile(item.scene, config, spec.clutter_factor, spec.gate_s), item.label


def build_dataset(spec: DatasetSpec, config: PulseTrainConfig
                  ) -> list[tuple[MotionProfile, GestureKind]]:
    """Render every profile of the dataset (memory heavy at full size)."""
    return list(iter_dataset(spec, config))


@dataclass(eq=False)
class FeatureSet:
    """Feature sets of a whole dataset, one row per profile."""

    rss: np.ndarray        # (n, L)
    range_lags: np.ndarray  # (n, L, K)
    range_values: np.ndarray  # (n, L, K)
    labels: list[GestureKind]
    seeds: list[int]
    frame_len: int

    def __len__(self):
        return len(self.labels)

    def rss_vector(self, i: int) -> RssVector:
        return RssVector(self.rss[i])

    def range_matrix(self, i: int) -> RangeMatrix:
        return RangeMatrix(self.range_lags[i], self.range_values[i], self.frame_len)

    def node_arrays(self, config: HierarchyConfig) -> tuple[np.ndarray, np.ndarray]:
        rows = [node_inputs(self.rss_vector(i), self.range_matrix(i), config)
                for i in range(len(self))]
        return (np.stack([r["rss"] for r in rows]), np.stack([r["range"] for r in rows]))

    def subset(self, idx) -> FeatureSet:
        idx = np.asarray(idx, dtype=int)
        return FeatureSet(self.rss[idx], self.range_lags[idx], self.range_values[idx],
                          [self.labels[i] for i in idx], [self.seeds[i] for i in idx],
                          self.frame_len)


def build_features(spec: DatasetSpec, config: PulseTrainConfig,
                   progress: Callable[[int, int], None] | None = None) -> FeatureSet:
    """Render the dataset and keep only its feature sets."""
    items = dataset_items(spec, config)
    rss, lags, vals = [], [], []
    frame_len = config.period_samples
    for n, item in enumerate(items):
        profile = render_profile(item.scene, config, spec.clutter_factor, spec.gate_s)
        r, m = extract_features(profile, N_PEAKS, PROFILE_LEN)
        rss.append(r.values)
        lags.append(m.lags)
        vals.append(m.values)
        if progress:
            progress(n + 1, len(items))
    return FeatureSet(np.stack(rss), np.stack(lags), np.stack(vals),
                      [it.label for it in items], [it.seed for it in items], frame_len)


# -- splitting and cross-validation -----------------------------------------

def stratified_split(labels: Sequence, test_fraction: float, seed: int,
                     fold: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Per-class random hold-out; ``(seed, fold)`` fixes the membership.

    Each class contributes ``max(1, round(test_fraction * n_class))`` test
    items, always leaving at least one for training.
    """
    if not 0 < test_fraction < 1:
        raise InvalidConfigError("test_fraction must lie in (0, 1)")
    labels = np.asarray([GestureKind.parse(g).value for g in labels])
    rng = np.random.default_rng([int(seed), int(fold)])
    test = []
    for cls in sorted(set(labels)):
        members = np.flatnonzero(labels == cls)
        if members.size < 2:
            raise ClassMissingError(f"class {cls!r} has fewer than two examples")
        n_test = min(max(1, int(round(test_fraction * members.size))), members.size - 1)
        test.extend(rng.permutation(members)[:n_test].tolist())
    test = np.sort(np.array(test, dtype=int))
    train = np.setdiff1d(np.arange(labels.size), test)
    return train, test


@dataclass(eq=False)
class ConfusionMatrix:
    """Counts and row-normalised rates, rows = true class, columns = predicted."""

    counts: np.ndarray
    classes: tuple[GestureKind, ...] = CLASS_ORDER

    @classmethod
    def from_predictions(cls, true, pred,
                         classes: Sequence[GestureKind] = CLASS_ORDER) -> ConfusionMatrix:
        classes = tuple(GestureKind.parse(c) for c in classes)
        pos = {c: i for i, c in enumerate(classes)}
        counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
        for t, p in zip(true, pred):
            t, p = GestureKind.parse(t), GestureKind.parse(p)
            if t in pos and p in pos:
                counts[pos[t], pos[p]] += 1
        return cls(counts, classes)

    @property
    def normalized(self) -> np.ndarray:
        """Row-normalised rates; rows without samples are NaN."""
        rows = self.counts.sum(axis=1, keepdims=True).astype(float)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(rows > 0, self.counts / rows, np.nan)

    def recall(self) -> np.ndarray:
        return np.diag(self.normalized).copy()

    def precision(self) -> np.ndarray:
        cols = self.counts.sum(axis=0).astype(float)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(cols > 0, np.diag(self.counts) / cols, np.nan)

    @property
    def average_accuracy(self) -> float:
        """Mean of the normalised diagonal over classes that have samples."""
        return float(np.nanmean(self.recall()))


@dataclass
class DetectionRates:
    false_accept: float  # no-gesture recordings reported as a gesture
    false_reject: float  # gestures reported as no-gesture
    n_negative: int = 0
    n_positive: int = 0


def detection_rates(true, pred) -> DetectionRates:
    t = np.array([GestureKind.parse(g) is GestureKind.NO_GESTURE for g in true])
    p = np.array([GestureKind.parse(g) is GestureKind.NO_GESTURE for g in pred])
    neg, pos = int(t.sum()), int((~t).sum())
    fa = float(np.sum(t & ~p) / neg) if neg else float("nan")
    fr = float(np.sum(~t & p) / pos) if pos else float("nan")
    return DetectionRates(fa, fr, neg, pos)


@dataclass(frozen=True)
class EvalConfig:
    test_fraction: float = 0.08
    folds: int = 12
    split_seed: int = 7
    grid_degrees: tuple[int, ...] = (2, 3)
    grid_gammas: tuple[float, ...] = (1.0, 10.0, 100.0)
    inner_folds: int = 3
    grid_search: bool = True

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, data: dict) -> EvalConfig:
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidConfigError(f"unknown eval keys: {sorted(unknown)}")
        return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in data.items()})


Predictor = Callable[[int], GestureKind]
# trainer(train_set) -> predictor over test-set rows
Trainer = Callable[[FeatureSet], Callable[[FeatureSet], list[GestureKind]]]


def hierarchy_trainer(config: HierarchyConfig = HierarchyConfig(),
                      eval_config: EvalConfig = EvalConfig()) -> Trainer:
    """Trainer fitting the five-node tree, optionally with per-node grid search."""

    def train(train_set: FeatureSet):
        model = fit_hierarchy(train_set, config, eval_config)
        return lambda test_set: model.predict_arrays(*test_set.node_arrays(config))

    return train


def fit_hierarchy(train_set: FeatureSet, config: HierarchyConfig = HierarchyConfig(),
                  eval_config: EvalConfig = EvalConfig()) -> HierarchyModel:
    rss_X, range_X = train_set.node_arrays(config)
    labels = train_set.labels
    overrides = None
    if eval_config.grid_search:
        overrides = select_node_params(rss_X, range_X, labels, config, eval_config)
    return train_hierarchy(rss_X, range_X, labels, config, overrides)


def select_node_params(rss_X, range_X, labels, config: HierarchyConfig,
                       eval_config: EvalConfig) -> dict[str, tuple[int, float]]:
    """Pick ``(degree, gamma)`` per node by inner stratified k-fold accuracy.

    Ties keep the earlier grid entry, so the smallest degree and gamma win.
    """
    from usgesture.classifier import lssvm_train

    y = np.array([GestureKind.parse(g).value for g in labels])
    chosen = {}
    for name, (kind, pos, neg) in NODES.items():
        X = rss_X if kind == "rss" else range_X
        is_pos = np.isin(y, [g.value for g in pos])
        sel = is_pos | np.isin(y, [g.value for g in neg])
        Xn, yn = X[sel], np.where(is_pos[sel], 1, -1)
        folds = _kfold(yn, eval_config.inner_folds, eval_config.split_seed)
        best, best_acc = None, -1.0
        for degree in eval_config.grid_degrees:
            for gamma in eval_config.grid_gammas:
                kernel = HierarchyConfig(degree=degree, kernel_offset=config.kernel_offset,
                                         kernel_scale=config.kernel_scale).kernel_for(X.shape[1])
                correct = 0
                for tr, te in folds:
                    m = lssvm_train(Xn[tr], yn[tr], kernel, gamma, config.standardize)
                    correct += int(np.sum(m.predict(Xn[te]) == yn[te]))
                acc = correct / yn.size
                if acc > best_acc:
                    best, best_acc = (degree, gamma), acc
        chosen[name] = best
    return chosen


def _kfold(y: np.ndarray, k: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    rng = np.random.default_rng(seed)
    fold_of = np.empty(y.size, dtype=int)
    for cls in np.unique(y):
        members = rng.permutation(np.flatnonzero(y == cls))
        fold_of[members] = np.arange(members.size) % k
    return [(np.flatnonzero(fold_of != f), np.flatnonzero(fold_of == f)) for f in range(k)]


@dataclass(eq=False)
class CrossValidationResult:
    confusion: ConfusionMatrix
    detection: DetectionRates
    true: list[GestureKind] = field(default_factory=list)
    predicted: list[GestureKind] = field(default_factory=list)
    folds: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)

    @property
    def average_accuracy(self) -> float:
        return self.confusion.average_accuracy


def cross_validate(data: FeatureSet, trainer: Trainer | None = None,
                   test_fraction: float = 0.08, folds: int = 12,
                   seed: int = 7) -> CrossValidationResult:
    """Repeated stratified hold-out; predictions of all folds are pooled.

    ``folds=1`` is the single-split protocol.
    """
    if trainer is None:
        trainer = hierarchy_trainer()
    if folds < 1:
        raise InvalidConfigError("folds must be >= 1")
    true, pred, splits = [], [], []
    for fold in range(folds):
        train_idx, test_idx = stratified_split(data.labels, test_fraction, seed, fold)
        train_set = data.subset(train_idx)
        missing = set(data.labels) - set(train_set.labels)
        if missing:
            raise ClassMissingError(f"classes {sorted(g.value for g in missing)} "
                                    "missing from a training split")
        predict = trainer(train_set)
        test_set = data.subset(test_idx)
        true.extend(test_set.labels)
        pred.extend(predict(test_set))
        splits.append((train_idx, test_idx))
    cm = ConfusionMatrix.from_predictions(true, pred)
    return CrossValidationResult(cm, detection_rates(true, pred), true, pred, splits)


# -- reporting -----------------------------------------------------------------

def _fmt(x: float) -> str:
    return "NA" if x is None or (isinstance(x, float) and math.isnan(x)) else repr(float(x))


def write_confusion_csv(path, rates, classes: Sequence[GestureKind] = CLASS_ORDER) -> None:
    """Rows = true class.  Values are written verbatim if given as strings."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["true\\predicted"] + [c.display_name for c in classes])
        for c, row in zip(classes, rates):
            w.writerow([c.display_name] + [v if isinstance(v, str) else _fmt(v) for v in row])


def read_confusion_csv(path) -> tuple[list[str], list[list[str]]]:
    """Class names and the raw decimal strings of a confusion CSV."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return [r[0] for r in rows[1:]], [r[1:] for r in rows[1:]]


def format_table(cm: ConfusionMatrix, digits: int = 4) -> str:
    names = [c.display_name for c in cm.classes]
    width = max(len(n) for n in names) + 2
    head = "Gesture".ljust(width) + "".join(n.rjust(width) for n in names)
    lines = [head, "-" * len(head)]
    for name, row in zip(names, cm.normalized):
        cells = "".join(("NA" if np.isnan(v) else f"{v:.{digits}f}").rjust(width) for v in row)
        lines.append(name.ljust(width) + cells)
    lines.append("")
    lines.append(f"average accuracy: {cm.average_accuracy:.4f}")
    return "\n".join(lines)


def metrics_dict(cm: ConfusionMatrix, detection: DetectionRates | None = None) -> dict:
    def clean(x):
        return None if math.isnan(x) else float(x)

    out = {
        "classes": [c.value for c in cm.classes],
        "average_accuracy": clean(cm.average_accuracy),
        "recall": {c.value: clean(v) for c, v in zip(cm.classes, cm.recall())},
        "precision": {c.value: clean(v) for c, v in zip(cm.classes, cm.precision())},
        "counts": cm.counts.tolist(),
        "support": {c.value: int(n) for c, n in zip(cm.classes, cm.counts.sum(axis=1))},
    }
    if detection is not None:
        out["detection"] = {"false_accept_rate": clean(detection.false_accept),
                            "false_reject_rate": clean(detection.false_reject),
                            "n_no_gesture": detection.n_negative,
                            "n_gesture": detection.n_positive}
    return out


def report(cm: ConfusionMatrix, path, detection: DetectionRates | None = None,
           figure: bool = True) -> dict[str, Path]:
    """Write the confusion matrix as CSV, text table, metrics JSON and figure."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "confusion": out / "confusion.csv",
        "counts": out / "confusion_counts.csv",
        "table": out / "confusion.txt",
        "metrics": out / "metrics.json",
    }
    write_confusion_csv(files["confusion"], cm.normalized, cm.classes)
    write_confusion_csv(files["counts"], [[str(int(v)) for v in row] for row in cm.counts],
                        cm.classes)
    files["table"].write_text(format_table(cm) + "\n")
    files["metrics"].write_text(json.dumps(metrics_dict(cm, detection), indent=2) + "\n")
    if figure:
        from usgesture.plotting import plot_confusion

        files["figure"] = out / "confusion.png"
        plot_confusion(cm, files["figure"])
    return files
