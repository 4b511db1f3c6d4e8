"""Image augmentation for cloning batches.

Shift-crop (edge-pad then re-crop at a random offset, which doubles as a
small translation) plus brightness/contrast jitter. One transform is
drawn per sample and shared across all of its channels, so stacked
frames stay registered.
"""

from __future__ import annotations

import numpy as np


def augment_images(x: np.ndarray, rng: np.random.Generator, pad: int = 4,
                   jitter: float = 0.1, training: bool = True) -> np.ndarray:
    """x: (N, C, H, W) float in [0, 1]. Identity when training=False."""
    if not training:
        return x
    n, c, h, w = x.shape
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)), mode="edge")
    dh = rng.integers(0, 2 * pad + 1, size=n)
    dw = rng.integers(0, 2 * pad + 1, size=n)
    rows = dh[:, None, None, None] + np.arange(h)[None, None, :, None]
    cols = dw[:, None, None, None] + np.arange(w)[None, None, None, :]
    out = xp[np.arange(n)[:, None, None, None],
             np.arange(c)[None, :, None, None], rows, cols]
    bright = rng.uniform(-jitter, jitter, size=n).astype(x.dtype)
    contrast = rng.uniform(1.0 - jitter, 1.0 + jitter, size=n).astype(x.dtype)
    m = out.reshape(n, -1).mean(axis=1)
    out = (out - m[:, None, None, None]) * contrast[:, None, None, None] \
        + m[:, None, None, None] + bright[:, None, None, None]
    return np.clip(out, 0.0, 1.0).astype(x.dtype, copy=False)
