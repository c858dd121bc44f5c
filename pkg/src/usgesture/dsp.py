"""Matched filtering, clutter removal and single-target ranging."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from usgesture.errors import (BadBlockLengthError, EmptyFrameError,
                              InvalidClutterFactorError, LengthMismatchError)
from usgesture.pulse import PulseTrainConfig, Waveform, chirp_samples, pulse_direction
from usgesture.simulator import SPEED_OF_SOUND_MPS

DEFAULT_CLUTTER_FACTOR = 0.8
DEFAULT_GATE_S = (0.5e-3, 3.5e-3)


@dataclass(eq=False)
class CorrelationFrame:
    """Summed matched-filter magnitudes of one block, indexed by lag."""

    values: np.ndarray
    block_index: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("correlation frame contains non-finite values")

    def __len__(self):
        return self.values.size


@dataclass(eq=False)
class MotionFrame:
    """De-cluttered frame; values outside ``gate`` (inclusive lags) are zero."""

    values: np.ndarray
    gate: tuple[int, int]
    block_index: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        lo, hi = self.gate
        self.gate = (int(lo), int(hi))

    def __len__(self):
        return self.values.size


def gate_lags(config: PulseTrainConfig, gate_s=DEFAULT_GATE_S) -> tuple[int, int]:
    """Inclusive lag window for a gate given in seconds."""
    lo = int(round(gate_s[0] * config.sample_rate_hz))
    hi = int(round(gate_s[1] * config.sample_rate_hz))
    hi = min(hi, config.period_samples - 1)
    if not 0 <= lo <= hi:
        raise ValueError(f"empty range gate {gate_s}")
    return lo, hi


@dataclass
class DeclutterState:
    """Running clutter estimate for one stream of frames.

    Carries sequential state; use one instance per stream.
    """

    clutter_factor: float = DEFAULT_CLUTTER_FACTOR
    gate: tuple[int, int] = (96, 672)
    background: np.ndarray | None = field(default=None, repr=False)
    frames_seen: int = 0

    def __post_init__(self):
        if not 0.0 <= self.clutter_factor <= 1.0:
            raise InvalidClutterFactorError(
                f"clutter factor must lie in [0, 1], got {self.clutter_factor}")

    @classmethod
    def for_config(cls, config: PulseTrainConfig,
                   clutter_factor: float = DEFAULT_CLUTTER_FACTOR,
                   gate_s=DEFAULT_GATE_S) -> DeclutterState:
        return cls(clutter_factor=clutter_factor, gate=gate_lags(config, gate_s))


def cross_correlate(received: Waveform | np.ndarray,
                    template: Waveform | np.ndarray) -> CorrelationFrame:
    """Sliding dot product ``sum_n received[n + k] * template[n]``.

    Returns lags ``k = 0 .. len(received) - len(template)``, computed by FFT.
    """
    r = np.asarray(getattr(received, "samples", received), dtype=float)
    h = np.asarray(getattr(template, "samples", template), dtype=float)
    if h.size == 0 or r.size < h.size:
        raise LengthMismatchError(
            f"received ({r.size}) must be at least as long as template ({h.size})")
    return CorrelationFrame(_fft_correlate(r, h))


def _fft_correlate(r: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Valid-mode correlation of the last axis of ``r`` with 1-D ``h``."""
    n_out = r.shape[-1] - h.size + 1
    nfft = scipy.fft.next_fast_len(r.shape[-1], real=True)
    spec = scipy.fft.rfft(r, nfft, axis=-1) * np.conj(scipy.fft.rfft(h, nfft))
    return scipy.fft.irfft(spec, nfft, axis=-1)[..., :n_out]


def correlate_blocks(blocks: np.ndarray, config: PulseTrainConfig) -> np.ndarray:
    """Vectorised :func:`block_correlate` over a ``(n_blocks, block_samples)`` array."""
    blocks = np.asarray(blocks, dtype=float)
    if blocks.ndim != 2 or blocks.shape[1] != config.block_samples:
        raise BadBlockLengthError(
            f"expected blocks of {config.block_samples} samples, got shape {blocks.shape}")
    n = config.pulse_samples
    p = config.period_samples
    periods = blocks.reshape(blocks.shape[0], config.pulses_per_block, p)
    # Zero tail so every lag of the period has a full template overlap.
    padded = np.concatenate([periods, np.zeros(periods.shape[:2] + (n - 1,))], axis=-1)
    out = np.zeros((blocks.shape[0], p))
    templates = {d: chirp_samples(config, d) for d in ("up", "down")}
    for k in range(config.pulses_per_block):
        out += np.abs(_fft_correlate(padded[:, k, :], templates[pulse_direction(k)]))
    return out


def block_correlate(block: Waveform | np.ndarray, config: PulseTrainConfig,
                    block_index: int = 0) -> CorrelationFrame:
    """Matched-filter one block and sum the per-pulse magnitudes.

    Period ``k`` is correlated against the chirp it carried (up for even
    ``k``, down for odd ``k``); the frame has one value per lag of a pulse
    period.
    """
    x = np.asarray(getattr(block, "samples", block), dtype=float)
    if x.ndim != 1 or x.size != config.block_samples:
        raise BadBlockLengthError(
            f"block has {x.size} samples, expected {config.block_samples}")
    return CorrelationFrame(correlate_blocks(x[None, :], config)[0], block_index)


def declutter(state: DeclutterState, frame: CorrelationFrame) -> MotionFrame:
    """Subtract the running background from ``frame`` and update it.

    The first frame passes through and initialises the background; later
    frames see ``frame - background`` followed by
    ``background <- c * background + (1 - c) * frame``.  Negative residuals
    clamp to zero and lags outside the gate are zeroed.
    """
    c = state.clutter_factor
    if not 0.0 <= c <= 1.0:
        raise InvalidClutterFactorError(f"clutter factor must lie in [0, 1], got {c}")
    v = frame.values
    if state.background is None:
        residual = v.copy()
        state.background = v.copy()
    else:
        if state.background.shape != v.shape:
            raise LengthMismatchError(
                f"frame length {v.size} differs from background {state.background.size}")
        residual = v - state.background
        # Same as c * background + (1 - c) * frame, but exact for a constant input.
        state.background = state.background + (1.0 - c) * residual
    state.frames_seen += 1
    out = np.zeros_like(residual)
    lo, hi = state.gate
    out[lo:hi + 1] = np.maximum(residual[lo:hi + 1], 0.0)
    return MotionFrame(out, state.gate, frame.block_index)


def motion_frames(blocks, config: PulseTrainConfig,
                  clutter_factor: float = DEFAULT_CLUTTER_FACTOR,
                  gate_s=DEFAULT_GATE_S) -> list[MotionFrame]:
    """Correlate and de-clutter a sequence of received blocks."""
    arr = np.stack([np.asarray(getattr(b, "samples", b), dtype=float) for b in blocks])
    corr = correlate_blocks(arr, config)
    state = DeclutterState.for_config(config, clutter_factor, gate_s)
    return [declutter(state, CorrelationFrame(row, i)) for i, row in enumerate(corr)]


def estimate_tof_rss(frame: MotionFrame, config: PulseTrainConfig,
                     speed_of_sound_mps: float = SPEED_OF_SOUND_MPS) -> tuple[float, float]:
    """Range and strength of the strongest gated return.

    Equal maxima resolve to the smallest lag.
    """
    lo, hi = frame.gate
    gated = frame.values[lo:hi + 1]
    if gated.size == 0 or not np.any(gated > 0):
        raise EmptyFrameError("motion frame has no energy inside the gate")
    idx = int(np.argmax(gated))
    lag = lo + idx
    rng = speed_of_sound_mps * lag / (2.0 * config.sample_rate_hz)
    return rng, float(gated[idx])
