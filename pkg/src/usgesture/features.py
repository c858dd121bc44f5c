"""Motion profiles and the two feature sets derived from them.

The RSS vector sums the heights of the strongest peaks of every frame; the
range matrix keeps the positions and heights of those peaks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np

from usgesture.dsp import MotionFrame
from usgesture.simulator import GestureKind

PROFILE_LEN = 100
N_PEAKS = 20

Norm = Literal["none", "max", "zscore"]


class Peak(NamedTuple):
    lag_index: int
    value: float


@dataclass(eq=False)
class MotionProfile:
    frames: list[MotionFrame]
    label: GestureKind | None = None

    def __post_init__(self):
        if not self.frames:
            raise ValueError("a motion profile needs at least one frame")
        n = len(self.frames[0])
        if any(len(f) != n for f in self.frames):
            raise ValueError("all frames of a profile must have the same length")

    def __len__(self):
        return len(self.frames)

    @property
    def frame_len(self) -> int:
        return len(self.frames[0])

    def as_array(self) -> np.ndarray:
        return np.stack([f.values for f in self.frames])


@dataclass(eq=False)
class RssVector:
    values: np.ndarray


@dataclass(eq=False)
class RangeMatrix:
    """``lags`` and ``values`` are ``(L, K)``; missing peaks are ``(0, 0)``."""

    lags: np.ndarray
    values: np.ndarray
    frame_len: int

    @property
    def shape(self):
        return self.values.shape


def fix_length(profile: MotionProfile, length: int = PROFILE_LEN) -> MotionProfile:
    """Centre-crop or zero-pad (evenly on both sides) to ``length`` frames."""
    frames = list(profile.frames)
    n = len(frames)
    if n > length:
        start = (n - length) // 2
        frames = frames[start:start + length]
    elif n < length:
        gate = frames[0].gate
        blank = np.zeros(profile.frame_len)
        before = (length - n) // 2
        after = length - n - before
        frames = ([MotionFrame(blank.copy(), gate) for _ in range(before)] + frames
                  + [MotionFrame(blank.copy(), gate) for _ in range(after)])
    return MotionProfile(frames, profile.label)


def _peak_candidates(v: np.ndarray, lo: int, hi: int) -> np.ndarray:
    """Indices of local maxima in ``v[lo:hi+1]``; plateaus report their left edge."""
    seg = v[lo:hi + 1]
    if seg.size == 0:
        return np.empty(0, dtype=int)
    # Pad with the frame's own neighbours (zero outside the frame).
    left = v[lo - 1] if lo > 0 else 0.0
    right = v[hi + 1] if hi + 1 < v.size else 0.0
    x = np.concatenate([[left], seg, [right]])
    d = np.diff(x)
    # Collapse flat runs so a plateau is judged by the slope around it.
    nz = np.flatnonzero(d)
    if nz.size < 2:
        return np.empty(0, dtype=int)
    rising = d[nz[:-1]] > 0
    falling = d[nz[1:]] < 0
    starts = nz[:-1][rising & falling]
    # A rise at diff position i lands on x[i + 1], i.e. seg[i].
    idx = starts[seg[starts] > 0]
    return idx + lo


def find_peaks(frame: MotionFrame, k: int = N_PEAKS) -> list[Peak]:
    """Up to ``k`` local maxima inside the gate, strongest first.

    A peak is higher than its left neighbour and not lower than its right
    one, with any flat top resolved to its leftmost sample.  Ties in height
    go to the smaller lag.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    lo, hi = frame.gate
    v = frame.values
    idx = _peak_candidates(v, lo, hi)
    if idx.size == 0:
        return []
    vals = v[idx]
    order = np.lexsort((idx, -vals))[:k]
    return [Peak(int(idx[i]), float(vals[i])) for i in order]


def _top_peaks(profile: MotionProfile, k: int):
    lags = np.zeros((len(profile), k), dtype=np.int64)
    vals = np.zeros((len(profile), k))
    for i, frame in enumerate(profile.frames):
        for j, p in enumerate(find_peaks(frame, k)):
            lags[i, j] = p.lag_index
            vals[i, j] = p.value
    return lags, vals


def rss_vector(profile: MotionProfile, k: int = N_PEAKS) -> RssVector:
    """Per-frame sum of the ``k`` highest peak values."""
    _, vals = _top_peaks(profile, k)
    return RssVector(vals.sum(axis=1))


def range_matrix(profile: MotionProfile, k: int = N_PEAKS) -> RangeMatrix:
    """Per-frame ``(lag, value)`` of the ``k`` highest peaks, zero padded."""
    lags, vals = _top_peaks(profile, k)
    return RangeMatrix(lags, vals, profile.frame_len)


def extract_features(profile: MotionProfile, k: int = N_PEAKS,
                     length: int = PROFILE_LEN) -> tuple[RssVector, RangeMatrix]:
    """Both feature sets after fixing the profile length; peaks found once."""
    profile = fix_length(profile, length)
    lags, vals = _top_peaks(profile, k)
    return RssVector(vals.sum(axis=1)), RangeMatrix(lags, vals, profile.frame_len)


def flatten_features(x: RssVector | RangeMatrix, norm: Norm = "none") -> tuple[np.ndarray, bool]:
    """Flatten a feature set into one vector.

    Range matrices interleave per-peak ``(lag / frame_len, value / max)``
    pairs frame by frame, giving ``2 * L * K`` entries.  ``norm`` then scales
    the whole vector by its maximum (``max``) or standardises it
    (``zscore``).  The second return value flags a degenerate normalisation
    (all-zero or constant input), in which case the vector is all zeros.
    """
    if norm not in ("none", "max", "zscore"):
        raise ValueError(f"unknown norm {norm!r}")
    if isinstance(x, RssVector):
        vec = np.asarray(x.values, dtype=float).copy()
    elif isinstance(x, RangeMatrix):
        peak = float(np.max(x.values)) if x.values.size else 0.0
        vals = x.values / peak if peak > 0 else np.zeros_like(x.values, dtype=float)
        lags = x.lags / float(x.frame_len)
        vec = np.stack([lags, vals], axis=-1).reshape(-1)
    else:
        raise TypeError(f"cannot flatten {type(x).__name__}")
    if not np.all(np.isfinite(vec)):
        raise ValueError("features must be finite")

    if norm == "max":
        m = float(np.max(np.abs(vec))) if vec.size else 0.0
        if m == 0:
            return np.zeros_like(vec), True
        vec = vec / m
    elif norm == "zscore":
        sd = float(np.std(vec)) if vec.size else 0.0
        if sd == 0:
            return np.zeros_like(vec), True
        vec = (vec - vec.mean()) / sd
    return vec, False
