"""Spectrogram and rolling-buffer behavior, checked against a direct DFT."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blindgrasp import dsp


def naive_frame_spectrum(frame: np.ndarray, keep: int) -> np.ndarray:
    """Independent oracle: literal windowed DFT sum, O(n^2)."""
    n = len(frame)
    win = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)
    x = frame * win
    k = np.arange(keep)[:, None]
    t = np.arange(n)[None, :]
    dft = (x[None, :] * np.exp(-2j * np.pi * k * t / n)).sum(axis=1)
    return np.log1p(np.abs(dft))


def test_paper_preset_shape():
    wave = np.zeros(2 * dsp.PAPER.fs, dtype=np.float32)
    out = dsp.spectrogram(wave, dsp.PAPER)
    assert out.shape == (57, 160)


def test_desk_preset_shape_matches_paper_frame_count():
    wave = np.zeros(2 * dsp.DESK.fs, dtype=np.float32)
    out = dsp.spectrogram(wave, dsp.DESK)
    assert out.shape == (57, 40)


def test_zero_wave_gives_zero_spectrogram():
    out = dsp.spectrogram(np.zeros(2 * dsp.DESK.fs), dsp.DESK)
    assert np.all(out == 0.0)


def test_entries_nonnegative_and_finite():
    rng = np.random.default_rng(3)
    out = dsp.spectrogram(rng.normal(size=2 * dsp.DESK.fs), dsp.DESK)
    assert np.all(out >= 0.0)
    assert np.all(np.isfinite(out))


@pytest.mark.parametrize("cfg,f_hz", [(dsp.DESK, 900.0), (dsp.DESK, 250.0)])
def test_sinusoid_peaks_at_bin_center(cfg, f_hz):
    t = np.arange(2 * cfg.fs) / cfg.fs
    wave = np.sin(2 * np.pi * f_hz * t)
    out = dsp.spectrogram(wave, cfg)
    expect_bin = round(f_hz * cfg.nperseg / cfg.fs)
    assert np.all(out.argmax(axis=1) == expect_bin)
    # Cross-check one frame against the literal DFT.
    frame = wave[: cfg.nperseg]
    oracle = naive_frame_spectrum(frame, cfg.keep_bins)
    np.testing.assert_allclose(out[0], oracle, rtol=1e-8, atol=1e-10)


def test_wrong_length_rejected():
    with pytest.raises(ValueError, match="2\\*fs"):
        dsp.spectrogram(np.zeros(100), dsp.DESK)


def test_batched_input_matches_loop():
    rng = np.random.default_rng(0)
    waves = rng.normal(size=(3, 2 * dsp.DESK.fs))
    batched = dsp.spectrogram(waves, dsp.DESK)
    for i in range(3):
        np.testing.assert_array_equal(batched[i], dsp.spectrogram(waves[i], dsp.DESK))


def test_amplitude_scaling_scales_premag():
    rng = np.random.default_rng(1)
    wave = rng.normal(size=2 * dsp.DESK.fs)
    s1 = np.expm1(dsp.spectrogram(wave, dsp.DESK))
    s3 = np.expm1(dsp.spectrogram(3.0 * wave, dsp.DESK))
    np.testing.assert_allclose(s3, 3.0 * s1, rtol=1e-9, atol=1e-9)


def test_time_shift_moves_frames_by_one():
    rng = np.random.default_rng(2)
    wave = rng.normal(size=2 * dsp.DESK.fs)
    shifted = dsp.push_samples(wave, rng.normal(size=dsp.DESK.step))
    a = dsp.spectrogram(wave, dsp.DESK)
    b = dsp.spectrogram(shifted, dsp.DESK)
    np.testing.assert_allclose(a[1:], b[:-1], atol=1e-6)


@settings(max_examples=60, deadline=None)
@given(
    fs=st.integers(min_value=40, max_value=2000),
    nperseg=st.integers(min_value=4, max_value=256),
    step_frac=st.floats(min_value=0.1, max_value=1.0),
)
def test_shape_law_holds(fs, nperseg, step_frac):
    if nperseg > 2 * fs:
        nperseg = 2 * fs
    step = max(1, int(nperseg * step_frac))
    keep = max(1, nperseg // 4)
    cfg = dsp.SpectrogramConfig(fs=fs, nperseg=nperseg, step=step, keep_bins=keep)
    out = dsp.spectrogram(np.zeros(2 * fs), cfg)
    expected_frames = (2 * fs - nperseg) // step + 1
    assert out.shape == (expected_frames, keep)
    assert cfg.n_frames == expected_frames


def test_invalid_configs_rejected():
    with pytest.raises(ValueError):
        dsp.SpectrogramConfig(fs=100, nperseg=16, step=4, keep_bins=100)
    with pytest.raises(ValueError):
        dsp.SpectrogramConfig(fs=100, nperseg=16, step=4, keep_bins=8, window="hamming")
    with pytest.raises(ValueError):
        dsp.SpectrogramConfig(fs=4, nperseg=16, step=4, keep_bins=8)


class TestPushSamples:
    def test_full_replacement(self):
        buf = np.arange(10, dtype=np.float64)
        new = np.arange(100, 110, dtype=np.float64)
        np.testing.assert_array_equal(dsp.push_samples(buf, new), new)

    def test_empty_push_is_identity(self):
        buf = np.arange(10, dtype=np.float64)
        np.testing.assert_array_equal(dsp.push_samples(buf, np.empty(0)), buf)

    def test_oversized_push_rejected(self):
        with pytest.raises(ValueError):
            dsp.push_samples(np.zeros(4), np.zeros(5))

    @settings(max_examples=40, deadline=None)
    @given(n=st.integers(min_value=0, max_value=32))
    def test_fifo_property(self, n):
        rng = np.random.default_rng(n)
        buf = rng.normal(size=32)
        new = rng.normal(size=n)
        out = dsp.push_samples(buf, new)
        assert out.shape == buf.shape
        if n:
            np.testing.assert_array_equal(out[-n:], new)
        np.testing.assert_array_equal(out[: 32 - n], buf[n:])
