"""Rolling audio buffers and log-magnitude spectrograms.

The microphone analog keeps the last two seconds of waveform in a FIFO
buffer. Features are Hann-windowed magnitude FFTs per segment, compressed
with log(1+x), with only the lowest `keep_bins` frequency bins retained.
No noise reduction is applied anywhere in the pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SpectrogramConfig:
    """Segmentation parameters for the rolling-buffer spectrogram.

    `step` is the hop between segment starts (nperseg minus overlap).
    The frame count over a full two-second buffer follows the shape law
    L = floor((2*fs - nperseg) / step) + 1.
    """

    fs: int
    nperseg: int
    step: int
    keep_bins: int
    window: str = "hann"

    def __post_init__(self) -> None:
        if self.window != "hann":
            raise ValueError(f"unsupported window {self.window!r}")
        if min(self.fs, self.nperseg, self.step, self.keep_bins) < 1:
            raise ValueError("fs, nperseg, step, keep_bins must be positive")
        if self.nperseg > self.buffer_len:
            raise ValueError(
                f"nperseg={self.nperseg} exceeds buffer length {self.buffer_len}"
            )
        if self.keep_bins > self.nperseg // 2 + 1:
            raise ValueError(
                f"keep_bins={self.keep_bins} exceeds rfft bins {self.nperseg // 2 + 1}"
            )

    @property
    def buffer_len(self) -> int:
        return 2 * self.fs

    @property
    def n_frames(self) -> int:
        return (self.buffer_len - self.nperseg) // self.step + 1


# Desk preset keeps the 57-frame layout of the full-rate pipeline while
# staying cheap enough for per-step feature extraction in tests.
DESK = SpectrogramConfig(fs=4800, nperseg=192, step=168, keep_bins=40)
PAPER = SpectrogramConfig(fs=48000, nperseg=1920, step=1680, keep_bins=160)


def hann_window(n: int) -> np.ndarray:
    """Periodic Hann window (DFT-even), float64."""
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def spectrogram(wave: np.ndarray, cfg: SpectrogramConfig) -> np.ndarray:
    """Log-magnitude spectrogram of a full buffer.

    Accepts leading batch dimensions; the last axis must be exactly
    2*fs samples. Returns (..., L, keep_bins), time-major, all entries
    >= 0 and finite.
    """
    wave = np.asarray(wave)
    if wave.shape[-1] != cfg.buffer_len:
        raise ValueError(
            f"wave length {wave.shape[-1]} != 2*fs = {cfg.buffer_len}"
        )
    frames = np.lib.stride_tricks.sliding_window_view(wave, cfg.nperseg, axis=-1)
    frames = frames[..., :: cfg.step, :]
    win = hann_window(cfg.nperseg).astype(wave.dtype, copy=False)
    mag = np.abs(np.fft.rfft(frames * win, axis=-1))[..., : cfg.keep_bins]
    return np.log1p(mag)


def push_samples(buffer: np.ndarray, new: np.ndarray) -> np.ndarray:
    """FIFO update: drop the oldest len(new) samples, append `new`.

    Length is preserved; len(new) may not exceed the buffer length.
    """
    buffer = np.asarray(buffer)
    new = np.asarray(new, dtype=buffer.dtype)
    n = new.shape[-1]
    if n > buffer.shape[-1]:
        raise ValueError(
            f"cannot push {n} samples into buffer of length {buffer.shape[-1]}"
        )
    if n == 0:
        return buffer.copy()
    return np.concatenate([buffer[..., n:], new], axis=-1)
