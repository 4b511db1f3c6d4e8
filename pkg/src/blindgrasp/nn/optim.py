"""Named parameter store with Adam state.

A ParamStore owns the trainable tensors of one model plus per-parameter
Adam moments and the shared step counter, so a checkpoint can resume
optimization mid-run. Update order is parameter insertion order, which
is deterministic for a fixed model builder.
"""

from __future__ import annotations

import numpy as np

from .tensor import Tensor


class ParamStore:
    def __init__(self, rng: np.random.Generator | None = None, dtype=np.float32):
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.dtype = np.dtype(dtype)
        self.params: dict[str, Tensor] = {}
        self.adam_m: dict[str, np.ndarray] = {}
        self.adam_v: dict[str, np.ndarray] = {}
        self.adam_t: int = 0

    def param(self, name: str, shape: tuple[int, ...], init: str = "he") -> Tensor:
        """Create and register a parameter tensor.

        init: "he" (fan-in scaled normal), "uniform" ([-s, s] with
        1/sqrt(fan_in)), "zeros", or "ones".
        """
        if name in self.params:
            raise ValueError(f"duplicate parameter {name!r}")
        if init == "zeros":
            data = np.zeros(shape, dtype=self.dtype)
        elif init == "ones":
            data = np.ones(shape, dtype=self.dtype)
        elif init == "he":
            fan_in = int(np.prod(shape[1:])) if len(shape) > 1 else int(shape[0])
            std = np.sqrt(2.0 / max(fan_in, 1))
            data = (self.rng.standard_normal(shape) * std).astype(self.dtype)
        elif init == "uniform":
            fan_in = int(np.prod(shape[:-1])) if len(shape) > 1 else int(shape[0])
            bound = 1.0 / np.sqrt(max(fan_in, 1))
            data = self.rng.uniform(-bound, bound, size=shape).astype(self.dtype)
        else:
            raise ValueError(f"unknown init {init!r}")
        t = Tensor(data, requires_grad=True)
        self.params[name] = t
        self.adam_m[name] = np.zeros(shape, dtype=self.dtype)
        self.adam_v[name] = np.zeros(shape, dtype=self.dtype)
        return t

    def __getitem__(self, name: str) -> Tensor:
        return self.params[name]

    def __contains__(self, name: str) -> bool:
        return name in self.params

    def names(self) -> list[str]:
        return list(self.params)

    def n_scalars(self) -> int:
        return sum(t.data.size for t in self.params.values())

    def zero_grads(self) -> None:
        for t in self.params.values():
            t.grad = None

    def copy_values_from(self, other: "ParamStore") -> None:
        """Copy parameter values and Adam state; shapes must match."""
        for name, t in self.params.items():
            src = other.params[name]
            if src.shape != t.shape:
                raise ValueError(f"shape mismatch for {name}: {src.shape} vs {t.shape}")
            t.data = src.data.astype(self.dtype).copy()
            self.adam_m[name] = other.adam_m[name].astype(self.dtype).copy()
            self.adam_v[name] = other.adam_v[name].astype(self.dtype).copy()
        self.adam_t = other.adam_t


def adam_step(store: ParamStore, lr: float = 1e-4, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8) -> None:
    """Bias-corrected Adam update over every parameter; grads are
    consumed (reset to None) afterwards."""
    missing = [n for n, t in store.params.items() if t.grad is None]
    if missing:
        raise ValueError(f"adam_step before backward: no grads for {missing[:3]}")
    store.adam_t += 1
    t = store.adam_t
    c1 = 1.0 - beta1 ** t
    c2 = 1.0 - beta2 ** t
    for name, p in store.params.items():
        g = p.grad
        m = store.adam_m[name]
        v = store.adam_v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * (g * g)
        p.data -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
        p.grad = None
