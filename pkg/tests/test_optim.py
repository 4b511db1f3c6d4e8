"""Adam update semantics, checked against a scalar reference implementation."""

import numpy as np
import pytest

from blindgrasp import nn
from blindgrasp.nn import ParamStore, Tensor, adam_step


def reference_adam(x0, grads, lr, b1=0.9, b2=0.999, eps=1e-8):
    """Independent scalar Adam, written straight from the update rule."""
    x, m, v = x0, 0.0, 0.0
    for t, g in enumerate(grads, start=1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mhat = m / (1 - b1 ** t)
        vhat = v / (1 - b2 ** t)
        x -= lr * mhat / (np.sqrt(vhat) + eps)
    return x


def test_matches_scalar_reference():
    store = ParamStore(dtype=np.float64)
    p = store.param("x", (1,), init="zeros")
    p.data[:] = 1.0
    grads = []
    for _ in range(50):
        g = 2.0 * p.data.copy()  # d/dx of x^2
        grads.append(float(g[0]))
        p.grad = g
        adam_step(store, lr=0.01)
    # Replay the recorded gradient sequence through the reference.
    assert abs(float(p.data[0]) - reference_adam(1.0, grads, 0.01)) < 1e-12


def test_quadratic_converges():
    store = ParamStore(dtype=np.float64)
    p = store.param("x", (1,), init="zeros")
    p.data[:] = 1.0
    for _ in range(500):
        p.grad = 2.0 * p.data.copy()
        adam_step(store, lr=0.01)
    assert abs(float(p.data[0])) < 0.05


def test_zero_grads_leave_params_unchanged():
    store = ParamStore(rng=np.random.default_rng(0))
    p = store.param("w", (3, 3))
    before = p.data.copy()
    p.grad = np.zeros_like(p.data)
    adam_step(store)
    np.testing.assert_array_equal(p.data, before)


def test_missing_grads_raise():
    store = ParamStore(rng=np.random.default_rng(0))
    store.param("w", (2, 2))
    with pytest.raises(ValueError, match="no grads"):
        adam_step(store)


def test_grads_consumed_after_step():
    store = ParamStore(rng=np.random.default_rng(0))
    p = store.param("w", (2, 2))
    p.grad = np.ones_like(p.data)
    adam_step(store)
    assert p.grad is None


def test_identical_seeds_give_identical_trajectories():
    def run():
        store = ParamStore(rng=np.random.default_rng(7))
        w = store.param("w", (4, 4))
        x = np.random.default_rng(1).standard_normal((8, 4)).astype(np.float32)
        losses = []
        for _ in range(20):
            out = nn.matmul(Tensor(x), w)
            loss = nn.mse_loss(out, Tensor(np.zeros_like(out.data)))
            losses.append(float(loss.data))
            loss.backward()
            adam_step(store, lr=1e-2)
        return losses, w.data.copy()

    l1, w1 = run()
    l2, w2 = run()
    assert l1 == l2
    np.testing.assert_array_equal(w1, w2)


def test_duplicate_param_name_rejected():
    store = ParamStore()
    store.param("w", (2,))
    with pytest.raises(ValueError, match="duplicate"):
        store.param("w", (2,))
