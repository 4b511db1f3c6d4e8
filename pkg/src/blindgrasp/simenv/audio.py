"""Contact-sound synthesis for the simulator microphone.

Every control tick appends a Gaussian noise floor; contact events add a
damped sinusoid whose frequency identifies what was struck. Object kinds
ring at fixed frequencies, the occluder (bag or wall fabric) rings low
and quiet, and "silent" objects add nothing.
"""

from __future__ import annotations

import numpy as np

from .. import dsp
from .types import ObjectKind

# Hz per sound source. The occluder entry reproduces the quieter rustle a
# gripper makes brushing the bag, which is what a vision-less policy tends
# to confuse with real object contact.
BURST_FREQ: dict[str, float | None] = {
    ObjectKind.KEYS.value: 900.0,
    ObjectKind.SCREWS.value: 1400.0,
    ObjectKind.PEANUTS.value: 250.0,
    ObjectKind.SILENT.value: None,
    "occluder": 120.0,
}
OCCLUDER_IMPULSE_SCALE = 0.3


def burst(impulse: float, kind: str, n: int, fs: int, decay: float = 100.0) -> np.ndarray:
    """Damped sinusoid impulse * exp(-decay*tau) * sin(2*pi*f*tau)."""
    freq = BURST_FREQ[kind]
    if freq is None or impulse <= 0.0:
        return np.zeros(n, dtype=np.float32)
    tau = np.arange(n, dtype=np.float64) / fs
    sig = impulse * np.exp(-decay * tau) * np.sin(2.0 * np.pi * freq * tau)
    return sig.astype(np.float32)


def render_chunk(events, n: int, fs: int, rng: np.random.Generator,
                 sigma: float = 0.01, decay: float = 100.0) -> np.ndarray:
    """Noise floor plus the sum of this tick's contact bursts."""
    chunk = (rng.standard_normal(n) * sigma).astype(np.float32)
    for impulse, kind in events:
        chunk += burst(impulse, kind, n, fs, decay)
    return chunk


def synth_audio(buffer: np.ndarray, impulse: float, kind: str, n: int,
                rng: np.random.Generator | None = None, sigma: float = 0.01,
                decay: float = 100.0) -> np.ndarray:
    """Advance a rolling buffer by n synthesized samples.

    The sample rate is implied by the buffer (length 2*fs). With
    impulse=0 only the noise floor is appended.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if rng is None:
        rng = np.random.default_rng(0)
    fs = len(buffer) // 2
    events = [(impulse, kind)] if impulse > 0.0 else []
    return dsp.push_samples(buffer, render_chunk(events, n, fs, rng, sigma, decay))
