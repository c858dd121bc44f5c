"""Synthetic echo channel standing in for the ultrasonic front end.

A received block is the transmit block convolved with a sparse set of echo
taps: the hand (point reflector, amplitude ``reflection_coeff / r**2``), the
direct transmitter-to-receiver leakage, fixed clutter reflectors and delayed
multipath copies of the hand echo, plus white Gaussian noise.  Delays are
rounded to the nearest sample.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from usgesture.errors import DelayExceedsFrameError, InvalidConfigError
from usgesture.pulse import PulseTrainConfig, Waveform, make_pulse_train

DEPTH_RANGE_M = (0.10, 0.50)
LATERAL_RANGE_M = (-0.20, 0.20)
MAX_SPEED_MPS = 1.0
SPEED_OF_SOUND_MPS = 343.0


class GestureKind(str, enum.Enum):
    FWD = "fwd"
    FWD_BWD = "fwd_bwd"
    SWIPE_LTR = "swipe_ltr"
    SWIPE_RTL = "swipe_rtl"
    HOLD_HAND = "hold_hand"
    NO_GESTURE = "no_gesture"

    @classmethod
    def parse(cls, value) -> GestureKind:
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        for member in cls:
            if key in (member.value, member.name.lower()):
                return member
        raise InvalidConfigError(f"unknown gesture {value!r}")

    @property
    def display_name(self) -> str:
        return _DISPLAY_NAMES[self]


_DISPLAY_NAMES = {
    GestureKind.FWD: "Fwd",
    GestureKind.FWD_BWD: "Fwd-Bwd",
    GestureKind.SWIPE_LTR: "Left-Right",
    GestureKind.SWIPE_RTL: "Right-Left",
    GestureKind.HOLD_HAND: "Hold Hand",
    GestureKind.NO_GESTURE: "No Gesture",
}

GESTURES = (GestureKind.FWD, GestureKind.FWD_BWD, GestureKind.SWIPE_LTR,
            GestureKind.SWIPE_RTL, GestureKind.HOLD_HAND)


def _in_box(p) -> bool:
    depth, lateral = p
    eps = 1e-12
    return (DEPTH_RANGE_M[0] - eps <= depth <= DEPTH_RANGE_M[1] + eps
            and LATERAL_RANGE_M[0] - eps <= lateral <= LATERAL_RANGE_M[1] + eps)


def _ease(u):
    """Raised-cosine position profile on [0, 1]; peak slope is pi/2."""
    u = np.clip(u, 0.0, 1.0)
    return 0.5 - 0.5 * np.cos(np.pi * u)


@dataclass(frozen=True)
class Trajectory:
    """Parametric hand path, positions as ``(depth_m, lateral_m)``.

    Every move between two waypoints follows a raised-cosine profile whose
    duration is chosen so the speed peaks at ``peak_speed_mps``.  The gesture
    kind fixes the waypoint schedule:

    * ``fwd``: start -> end, then stay.
    * ``fwd_bwd``: start -> end, pause ``hold_fraction * duration``, -> start.
    * swipes: start -> end (lateral sweep).
    * ``hold_hand``: start -> end (entry), hold ``hold_fraction * duration``,
      -> start (exit).  ``hold_fraction >= 1`` keeps the hand at ``end``.
    * ``no_gesture``: no hand in the scene.

    Motion begins at ``onset_s``.
    """

    gesture: GestureKind
    duration_s: float = 2.0
    start: tuple[float, float] = (0.45, 0.0)
    end: tuple[float, float] = (0.15, 0.0)
    peak_speed_mps: float = 0.8
    onset_s: float = 0.2
    hold_fraction: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "gesture", GestureKind.parse(self.gesture))
        object.__setattr__(self, "start", tuple(float(v) for v in self.start))
        object.__setattr__(self, "end", tuple(float(v) for v in self.end))
        if self.duration_s <= 0:
            raise InvalidConfigError("duration_s must be positive")
        if self.gesture is GestureKind.NO_GESTURE:
            return
        if not 0 < self.peak_speed_mps <= MAX_SPEED_MPS:
            raise InvalidConfigError(f"peak_speed_mps must lie in (0, {MAX_SPEED_MPS}]")
        if not (_in_box(self.start) and _in_box(self.end)):
            raise InvalidConfigError(f"trajectory endpoints {self.start}, {self.end} "
                                     "leave the operating box")
        if self.onset_s < 0 or self.hold_fraction < 0:
            raise InvalidConfigError("onset_s and hold_fraction must be non-negative")
        if self.motion_end_s > self.duration_s + 1e-12:
            raise InvalidConfigError(
                f"{self.gesture.value} motion ends at {self.motion_end_s:.3f} s, "
                f"after the {self.duration_s} s window")

    @property
    def has_hand(self) -> bool:
        return self.gesture is not GestureKind.NO_GESTURE

    @property
    def move_time_s(self) -> float:
        """Duration of one start <-> end move at the configured peak speed."""
        dist = math.dist(self.start, self.end)
        return math.pi * dist / (2 * self.peak_speed_mps)

    def _segments(self):
        """List of (t0, t1, p_from, p_to); holds are implicit between them."""
        g = self.gesture
        if g is GestureKind.NO_GESTURE:
            return []
        if g is GestureKind.HOLD_HAND and self.hold_fraction >= 1:
            return []
        tm = self.move_time_s
        t0 = self.onset_s
        segs = [(t0, t0 + tm, self.start, self.end)]
        if g in (GestureKind.FWD_BWD, GestureKind.HOLD_HAND):
            t1 = t0 + tm + self.hold_fraction * self.duration_s
            segs.append((t1, t1 + tm, self.end, self.start))
        return segs

    @property
    def motion_end_s(self) -> float:
        segs = self._segments()
        return segs[-1][1] if segs else 0.0

    def position(self, t) -> np.ndarray:
        """Hand position(s) at time(s) ``t``; shape ``t.shape + (2,)``."""
        if not self.has_hand:
            raise InvalidConfigError("no_gesture trajectories have no hand")
        t = np.asarray(t, dtype=float)
        flat = t.reshape(-1)
        segs = self._segments()
        if not segs:
            pos = np.tile(np.array(self.end), (flat.size, 1))
            return pos.reshape(t.shape + (2,))
        pos = np.tile(np.array(segs[0][2]), (flat.size, 1))
        for t0, t1, a, b in segs:
            a = np.array(a)
            b = np.array(b)
            mask = flat >= t0
            if t1 > t0:
                frac = _ease((flat[mask] - t0) / (t1 - t0))
            else:
                frac = np.ones(int(mask.sum()))
            pos[mask] = a + frac[:, None] * (b - a)
        return pos.reshape(t.shape + (2,))

    def speed(self, t) -> np.ndarray:
        """Analytic speed (m/s) at time(s) ``t``."""
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        for t0, t1, a, b in self._segments():
            if t1 <= t0:
                continue
            mask = (t >= t0) & (t <= t1)
            dist = math.dist(a, b)
            u = (t[mask] - t0) / (t1 - t0)
            out[mask] = 0.5 * np.pi * np.sin(np.pi * u) * dist / (t1 - t0)
        return out

    def to_dict(self) -> dict:
        return {
            "gesture": self.gesture.value,
            "duration_s": self.duration_s,
            "start": list(self.start),
            "end": list(self.end),
            "peak_speed_mps": self.peak_speed_mps,
            "onset_s": self.onset_s,
            "hold_fraction": self.hold_fraction,
        }

    @classmethod
    def from_dict(cls, data: dict) -> Trajectory:
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidConfigError(f"unknown trajectory keys: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class Scene:
    """Everything the renderer needs besides the transmit block.

    ``static_clutter`` holds ``(range_m, gain)`` reflectors on the boresight
    axis; ``gain`` is the received amplitude.  ``multipath`` holds
    ``(extra_delay_s, gain)`` copies of the hand echo, ``gain`` relative to
    the direct hand echo.  ``rss_jitter`` is the relative standard deviation
    of a per-block random factor on the hand reflectivity.
    ``sub_reflectors`` adds that many weaker points around the hand.
    """

    trajectory: Trajectory
    reflection_coeff: float = 0.01
    tx_rx_baseline_m: float = 0.011
    self_interference_gain: float = 0.0
    static_clutter: tuple = ()
    multipath: tuple = ()
    noise_std: float = 0.0
    speed_of_sound_mps: float = SPEED_OF_SOUND_MPS
    rng_seed: int = 0
    rss_jitter: float = 0.0
    sub_reflectors: int = 0

    def __post_init__(self):
        object.__setattr__(self, "static_clutter",
                           tuple((float(r), float(g)) for r, g in self.static_clutter))
        object.__setattr__(self, "multipath",
                           tuple((float(d), float(g)) for d, g in self.multipath))
        if not 0 < self.reflection_coeff <= 1:
            raise InvalidConfigError("reflection_coeff must lie in (0, 1]")
        if self.tx_rx_baseline_m < 0 or self.speed_of_sound_mps <= 0:
            raise InvalidConfigError("baseline must be >= 0 and speed of sound > 0")
        if self.noise_std < 0 or self.rss_jitter < 0:
            raise InvalidConfigError("noise_std and rss_jitter must be non-negative")
        if not 0 <= self.sub_reflectors <= 3:
            raise InvalidConfigError("sub_reflectors must lie in [0, 3]")
        gains = [self.self_interference_gain, self.noise_std]
        gains += [g for _, g in self.static_clutter] + [g for _, g in self.multipath]
        if not all(math.isfinite(g) for g in gains):
            raise InvalidConfigError("scene gains must be finite")
        if any(r <= 0 for r, _ in self.static_clutter):
            raise InvalidConfigError("clutter ranges must be positive")
        if any(d < 0 for d, _ in self.multipath):
            raise InvalidConfigError("multipath delays must be non-negative")

    def with_(self, **changes) -> Scene:
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "trajectory": self.trajectory.to_dict(),
            "reflection_coeff": self.reflection_coeff,
            "tx_rx_baseline_m": self.tx_rx_baseline_m,
            "self_interference_gain": self.self_interference_gain,
            "static_clutter": [list(c) for c in self.static_clutter],
            "multipath": [list(m) for m in self.multipath],
            "noise_std": self.noise_std,
            "speed_of_sound_mps": self.speed_of_sound_mps,
            "rng_seed": self.rng_seed,
            "rss_jitter": self.rss_jitter,
            "sub_reflectors": self.sub_reflectors,
        }

    @classmethod
    def from_dict(cls, data: dict) -> Scene:
        data = dict(data)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidConfigError(f"unknown scene keys: {sorted(unknown)}")
        if "trajectory" not in data:
            raise InvalidConfigError("scene needs a trajectory")
        data["trajectory"] = Trajectory.from_dict(data["trajectory"])
        return cls(**data)


def range_to_delay(position, baseline_m: float = 0.011,
                   c_mps: float = SPEED_OF_SOUND_MPS) -> float:
    """Round-trip time of flight tx -> point -> rx.

    ``position`` is ``(depth, lateral)``; the transmitter and receiver sit at
    lateral ``-baseline/2`` and ``+baseline/2`` on the zero-depth plane.
    """
    depth, lateral = float(position[0]), float(position[1])
    half = baseline_m / 2
    path = math.hypot(depth, lateral + half) + math.hypot(depth, lateral - half)
    return path / c_mps


def _delays(points: np.ndarray, baseline_m: float, c_mps: float) -> np.ndarray:
    depth = points[..., 0]
    lateral = points[..., 1]
    half = baseline_m / 2
    path = np.hypot(depth, lateral + half) + np.hypot(depth, lateral - half)
    return path / c_mps


# Fixed offsets (depth, lateral) and relative gains of the optional
# sub-reflectors, e.g. fingertips and knuckles around the palm centre.
_SUB_REFLECTORS = (((0.012, 0.018), 0.45), ((-0.010, -0.015), 0.35), ((0.020, -0.008), 0.25))


def _block_rng(scene: Scene, block_index: int) -> np.random.Generator:
    return np.random.default_rng([int(scene.rng_seed), int(block_index)])


def _hand_taps(scene: Scene, config: PulseTrainConfig, block_index: int,
               rng_factor: float) -> list[list[tuple[float, float]]]:
    """Per-pulse lists of (delay_s, amplitude) for the hand and its multipath."""
    n = config.pulses_per_block
    taps: list[list[tuple[float, float]]] = [[] for _ in range(n)]
    traj = scene.trajectory
    if not traj.has_hand:
        return taps
    t = (block_index * n + np.arange(n)) * config.pulse_period_s
    pos = traj.position(t)
    points = [(pos, 1.0)]
    for (dz, dx), g in _SUB_REFLECTORS[:scene.sub_reflectors]:
        points.append((pos + np.array([dz, dx]), g))
    for p, rel in points:
        d = _delays(p, scene.tx_rx_baseline_m, scene.speed_of_sound_mps)
        r2 = np.sum(p ** 2, axis=-1)
        amp = rel * rng_factor * scene.reflection_coeff / r2
        for k in range(n):
            taps[k].append((d[k], amp[k]))
            for extra, g in scene.multipath:
                taps[k].append((d[k] + extra, g * amp[k]))
    return taps


def _static_taps(scene: Scene) -> list[tuple[float, float]]:
    taps = []
    if scene.self_interference_gain != 0:
        taps.append((scene.tx_rx_baseline_m / scene.speed_of_sound_mps,
                     scene.self_interference_gain))
    for r, g in scene.static_clutter:
        taps.append((range_to_delay((r, 0.0), scene.tx_rx_baseline_m,
                                    scene.speed_of_sound_mps), g))
    return taps


def hand_delays(scene: Scene, config: PulseTrainConfig, block_index: int) -> np.ndarray:
    """Exact (unrounded) hand echo delay of each pulse in a block."""
    traj = scene.trajectory
    if not traj.has_hand:
        return np.array([])
    n = config.pulses_per_block
    t = (block_index * n + np.arange(n)) * config.pulse_period_s
    return _delays(traj.position(t), scene.tx_rx_baseline_m, scene.speed_of_sound_mps)


def simulate_block(scene: Scene, tx_block: Waveform, block_index: int,
                   config: PulseTrainConfig | None = None) -> Waveform:
    """Render the received signal of one block.

    The hand position is sampled at each pulse's emission time.  The result
    is fully determined by ``scene`` (including ``rng_seed``) and
    ``block_index``.
    """
    if config is None:
        config = PulseTrainConfig(sample_rate_hz=tx_block.sample_rate_hz)
    if tx_block.sample_rate_hz != config.sample_rate_hz:
        raise InvalidConfigError("transmit block sample rate differs from config")
    if len(tx_block) != config.block_samples:
        raise InvalidConfigError(
            f"transmit block has {len(tx_block)} samples, expected {config.block_samples}")
    fs = config.sample_rate_hz
    period = config.period_samples
    total = config.block_samples
    x = tx_block.samples
    rng = _block_rng(scene, block_index)

    factor = 1.0
    if scene.rss_jitter > 0:
        factor = max(0.0, 1.0 + scene.rss_jitter * rng.standard_normal())

    per_pulse = _hand_taps(scene, config, block_index, factor)
    static = _static_taps(scene)
    out = np.zeros(total)
    for k in range(config.pulses_per_block):
        pulse = x[k * period:(k + 1) * period]
        nz = np.flatnonzero(pulse)
        if nz.size == 0:
            continue
        pulse = pulse[:nz[-1] + 1]
        for delay, amp in static + per_pulse[k]:
            if delay >= config.pulse_period_s:
                raise DelayExceedsFrameError(
                    f"echo delay {delay * 1e3:.3f} ms exceeds the "
                    f"{config.pulse_period_s * 1e3:.3f} ms pulse period")
            start = k * period + int(round(delay * fs))
            stop = min(start + pulse.size, total)
            if start < total:
                out[start:stop] += amp * pulse[:stop - start]

    if scene.noise_std > 0:
        out += scene.noise_std * rng.standard_normal(total)
    return Waveform(out, fs)


def simulate_gesture(scene: Scene, config: PulseTrainConfig) -> list[Waveform]:
    """Render every block of the trajectory window (100 by default)."""
    n_blocks = scene.trajectory.duration_s / config.block_len_s
    if abs(n_blocks - round(n_blocks)) > 1e-9:
        raise InvalidConfigError(
            f"duration {scene.trajectory.duration_s} s is not a whole number of "
            f"{config.block_len_s} s blocks")
    tx = make_pulse_train(config)
    return [simulate_block(scene, tx, b, config) for b in range(int(round(n_blocks)))]


def default_trajectory(gesture: GestureKind | str, duration_s: float = 2.0) -> Trajectory:
    """A representative, jitter-free trajectory for each gesture."""
    g = GestureKind.parse(gesture)
    if g is GestureKind.FWD:
        return Trajectory(g, duration_s, (0.45, 0.0), (0.15, 0.0), 0.8, 0.4)
    if g is GestureKind.FWD_BWD:
        return Trajectory(g, duration_s, (0.45, 0.0), (0.15, 0.0), 0.8, 0.2, 0.05)
    if g is GestureKind.SWIPE_LTR:
        return Trajectory(g, duration_s, (0.25, -0.19), (0.35, 0.19), 0.8, 0.5)
    if g is GestureKind.SWIPE_RTL:
        return Trajectory(g, duration_s, (0.35, 0.19), (0.25, -0.19), 0.8, 0.5)
    if g is GestureKind.HOLD_HAND:
        return Trajectory(g, duration_s, (0.30, -0.19), (0.30, 0.0), 0.8, 0.2, 0.4)
    return Trajectory(g, duration_s)

