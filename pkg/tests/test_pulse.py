import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from usgesture.errors import InvalidConfigError
from usgesture.pulse import (PulseTrainConfig, Waveform, chirp_samples, instantaneous_frequency,
                             make_chirp, make_pulse_train, pulse_direction)

# Measured once with np.correlate (full mode) on the default chirps.
PINNED_XCORR_RATIO = 0.5059


def xcorr_ratio(cfg):
    up, down = chirp_samples(cfg, "up"), chirp_samples(cfg, "down")
    cross = np.correlate(up, down, "full")
    return np.max(np.abs(cross)) / np.dot(up, up)


def test_default_chirp_length_and_sweep(config):
    w = make_chirp(config, "up")
    assert len(w) == 96
    assert w.sample_rate_hz == 192000
    f = instantaneous_frequency(config, "up")
    assert f[0] == pytest.approx(35300, abs=80)
    assert f[-1] == pytest.approx(42300, abs=80)
    assert np.all(np.diff(f) > 0)
    assert np.all(np.diff(instantaneous_frequency(config, "down")) < 0)


def test_peak_amplitude_matches_config():
    cfg = PulseTrainConfig(amplitude=0.4)
    assert np.max(np.abs(chirp_samples(cfg, "up"))) == pytest.approx(0.4, rel=1e-12)


def test_zero_bandwidth_is_a_tone_burst():
    cfg = PulseTrainConfig(half_bandwidth_hz=0.0)
    x = chirp_samples(cfg, "up")
    spectrum = np.abs(np.fft.rfft(x, 1 << 16))
    freqs = np.fft.rfftfreq(1 << 16, 1 / cfg.sample_rate_hz)
    assert freqs[np.argmax(spectrum)] == pytest.approx(38800, abs=20)
    assert np.allclose(instantaneous_frequency(cfg, "up"), 38800)


def test_reversed_up_chirp_equals_down_chirp(config):
    up, down = chirp_samples(config, "up"), chirp_samples(config, "down")
    assert np.max(np.abs(up[::-1] - down)) <= 1e-9


def test_pulse_train_layout(config):
    x = make_pulse_train(config).samples
    assert x.size == 3840
    active = np.zeros(x.size, dtype=bool)
    for off in (0, 960, 1920, 2880):
        active[off:off + 96] = True
    assert np.all(x[~active] == 0)
    up, down = chirp_samples(config, "up"), chirp_samples(config, "down")
    for k, off in enumerate((0, 960, 1920, 2880)):
        expected = up if k % 2 == 0 else down
        np.testing.assert_array_equal(x[off:off + 96], expected)
    assert [pulse_direction(k) for k in range(4)] == ["up", "down", "up", "down"]


def test_single_pulse_block():
    cfg = PulseTrainConfig(pulses_per_block=1)
    x = make_pulse_train(cfg).samples
    assert x.size == 960
    np.testing.assert_array_equal(x[:96], chirp_samples(cfg, "up"))
    assert not np.any(x[96:])


def test_pulse_train_energy(config):
    single = np.sum(chirp_samples(config, "up") ** 2)
    total = np.sum(make_pulse_train(config).samples ** 2)
    assert total == pytest.approx(4 * single, rel=1e-9)


def test_autocorrelation_main_lobe(config):
    x = chirp_samples(config, "up")
    a = np.correlate(x, x, "full")
    zero = x.size - 1
    assert np.argmax(a) == zero
    assert a[zero] > np.max(np.delete(a, zero))


def test_up_down_orthogonality_regression(config):
    assert xcorr_ratio(config) == pytest.approx(PINNED_XCORR_RATIO, rel=0.10)


def test_spectral_containment(config):
    x = chirp_samples(config, "up")
    nfft = 1 << 16
    power = np.abs(np.fft.rfft(x, nfft)) ** 2
    freqs = np.fft.rfftfreq(nfft, 1 / config.sample_rate_hz)
    margin = 2 / config.pulse_len_s
    band = (freqs >= 38800 - 3500 - margin) & (freqs <= 38800 + 3500 + margin)
    assert power[band].sum() / power.sum() >= 0.95


@pytest.mark.parametrize("kwargs", [
    {"carrier_freq_hz": 95000.0},
    {"pulse_len_s": 0.005},
    {"pulse_len_s": 0.006},
    {"pulses_per_block": 0},
    {"amplitude": 0.0},
    {"amplitude": 1.5},
])
def test_invalid_configs_rejected(kwargs):
    with pytest.raises(InvalidConfigError):
        PulseTrainConfig(**kwargs)


def test_config_derived_sizes(config):
    assert config.pulse_samples == 96
    assert config.period_samples == 960
    assert config.block_samples == 3840
    assert config.block_len_s == pytest.approx(0.02)


def test_config_dict_round_trip(config):
    assert PulseTrainConfig.from_dict(config.to_dict()) == config
    with pytest.raises(InvalidConfigError):
        PulseTrainConfig.from_dict({**config.to_dict(), "bogus": 1})


def test_waveform_rejects_non_finite():
    with pytest.raises(ValueError):
        Waveform(np.array([0.0, np.nan]), 192000.0)
    with pytest.raises(ValueError):
        Waveform(np.zeros(4), 0.0)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 8), amp=st.floats(0.05, 1.0))
def test_train_length_and_energy_property(n, amp):
    cfg = PulseTrainConfig(pulses_per_block=n, amplitude=amp)
    x = make_pulse_train(cfg).samples
    assert x.size == round(n * cfg.pulse_period_s * cfg.sample_rate_hz)
    single = np.sum(chirp_samples(cfg, "up") ** 2)
    assert np.sum(x ** 2) == pytest.approx(n * single, rel=1e-9)
    assert np.max(np.abs(x)) <= amp * (1 + 1e-12)
