"""Transmit waveform design: alternating up/down LFM chirps in a pulse block."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Literal

import numpy as np
from scipy.signal.windows import tukey

from usgesture.errors import InvalidConfigError

Direction = Literal["up", "down"]


@dataclass(frozen=True)
class PulseTrainConfig:
    """Timing and frequency parameters of one transmitted block.

    A block holds ``pulses_per_block`` pulse periods of ``pulse_period_s``;
    each period starts with a chirp of ``pulse_len_s`` swept over
    ``carrier_freq_hz +/- half_bandwidth_hz``.
    """

    carrier_freq_hz: float = 38800.0
    half_bandwidth_hz: float = 3500.0
    pulse_len_s: float = 0.0005
    pulse_period_s: float = 0.005
    pulses_per_block: int = 4
    sample_rate_hz: float = 192000.0
    amplitude: float = 1.0
    taper: float = 0.0  # Tukey shape parameter, 0 = rectangular

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not self.sample_rate_hz > 0:
            raise InvalidConfigError("sample_rate_hz must be positive")
        if not 0 < self.pulse_len_s < self.pulse_period_s:
            raise InvalidConfigError(
                f"need 0 < pulse_len_s < pulse_period_s, got "
                f"{self.pulse_len_s} and {self.pulse_period_s}")
        if self.half_bandwidth_hz < 0 or self.carrier_freq_hz <= self.half_bandwidth_hz:
            raise InvalidConfigError("sweep band must lie at positive frequencies")
        if self.carrier_freq_hz + self.half_bandwidth_hz >= self.sample_rate_hz / 2:
            raise InvalidConfigError(
                f"upper sweep frequency {self.carrier_freq_hz + self.half_bandwidth_hz} Hz "
                f"violates Nyquist for fs = {self.sample_rate_hz} Hz")
        if int(self.pulses_per_block) != self.pulses_per_block or self.pulses_per_block < 1:
            raise InvalidConfigError("pulses_per_block must be a positive integer")
        if not 0 < self.amplitude <= 1:
            raise InvalidConfigError("amplitude must lie in (0, 1]")
        if not 0 <= self.taper <= 1:
            raise InvalidConfigError("taper must lie in [0, 1]")
        if self.pulse_samples < 2:
            raise InvalidConfigError("pulse shorter than two samples")

    @property
    def block_len_s(self) -> float:
        return self.pulses_per_block * self.pulse_period_s

    @property
    def pulse_samples(self) -> int:
        return int(round(self.pulse_len_s * self.sample_rate_hz))

    @property
    def period_samples(self) -> int:
        return int(round(self.pulse_period_s * self.sample_rate_hz))

    @property
    def block_samples(self) -> int:
        return self.pulses_per_block * self.period_samples

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> PulseTrainConfig:
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidConfigError(f"unknown pulse-train keys: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True, eq=False)
class Waveform:
    """Real-valued samples at a fixed sample rate."""

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1:
            raise ValueError("waveform samples must be one-dimensional")
        if not np.all(np.isfinite(samples)):
            raise ValueError("waveform contains non-finite samples")
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz


def chirp_samples(config: PulseTrainConfig, direction: Direction = "up") -> np.ndarray:
    """Sample one chirp as a bare array (see :func:`make_chirp`)."""
    if direction not in ("up", "down"):
        raise ValueError(f"direction must be 'up' or 'down', got {direction!r}")
    n = config.pulse_samples
    fs = config.sample_rate_hz
    duration = n / fs
    # Time axis centred on the pulse middle so that reversing an up-chirp
    # gives the down-chirp exactly.
    t = (np.arange(n) - (n - 1) / 2) / fs
    rate = config.half_bandwidth_hz / duration  # half the sweep rate in Hz/s
    if direction == "down":
        rate = -rate
    phase = 2 * np.pi * (config.carrier_freq_hz * t + rate * t ** 2)
    x = np.cos(phase)
    if config.taper > 0:
        x = x * tukey(n, config.taper)
    return config.amplitude * x / np.max(np.abs(x))


def make_chirp(config: PulseTrainConfig, direction: Direction = "up") -> Waveform:
    """One LFM pulse.

    The instantaneous frequency sweeps linearly from ``fc - B`` to ``fc + B``
    for ``up`` and the reverse for ``down``; the peak absolute sample equals
    ``config.amplitude``.
    """
    return Waveform(chirp_samples(config, direction), config.sample_rate_hz)


def pulse_direction(k: int) -> Direction:
    """Chirp direction of 0-indexed pulse ``k`` within a block."""
    return "up" if k % 2 == 0 else "down"


def make_pulse_train(config: PulseTrainConfig) -> Waveform:
    """One transmit block: pulse ``k`` starts at ``k * period_samples``.

    Even (0-indexed) pulses are up-chirps and odd pulses are down-chirps;
    the rest of each period is silent.
    """
    out = np.zeros(config.block_samples)
    chirps = {d: chirp_samples(config, d) for d in ("up", "down")}
    n = config.pulse_samples
    for k in range(config.pulses_per_block):
        start = k * config.period_samples
        out[start:start + n] = chirps[pulse_direction(k)]
    return Waveform(out, config.sample_rate_hz)


def instantaneous_frequency(config: PulseTrainConfig, direction: Direction = "up") -> np.ndarray:
    """Analytic instantaneous frequency (Hz) at each chirp sample."""
    n = config.pulse_samples
    t = (np.arange(n) - (n - 1) / 2) / config.sample_rate_hz
    slope = 2 * config.half_bandwidth_hz / (n / config.sample_rate_hz)
    if direction == "down":
        slope = -slope
    return config.carrier_freq_hz + slope * t
