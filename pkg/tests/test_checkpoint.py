"""Binary tensor container: bit-exact round-trips and error paths."""

import numpy as np
import pytest

from blindgrasp import nn
from blindgrasp.nn import ParamStore, Tensor, adam_step
from blindgrasp.nn.checkpoint import load_params, load_tensors, save_params, save_tensors


def test_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    tensors = {
        "a/w": rng.standard_normal((3, 4)).astype(np.float32),
        "a/b": rng.standard_normal(4),
        "img": rng.integers(0, 255, size=(2, 5, 5, 3)).astype(np.uint8),
        "flags": np.array([True, False, True]),
        "count": np.array([42], dtype=np.int64),
    }
    path = tmp_path / "t.bin"
    save_tensors(path, tensors)
    back = load_tensors(path)
    assert set(back) == set(tensors)
    for name, arr in tensors.items():
        expected = arr.astype(np.uint8) if arr.dtype == np.bool_ else arr
        assert back[name].dtype == expected.dtype
        assert back[name].tobytes() == expected.tobytes()


def test_params_roundtrip_with_adam_state(tmp_path):
    store = ParamStore(rng=np.random.default_rng(5))
    w = store.param("lin/w", (4, 4))
    b = store.param("lin/b", (4,), init="zeros")
    x = np.random.default_rng(2).standard_normal((8, 4)).astype(np.float32)
    for _ in range(3):
        out = nn.add(nn.matmul(Tensor(x), w), b)
        nn.mse_loss(out, Tensor(np.ones_like(out.data))).backward()
        adam_step(store, lr=1e-3)
    path = tmp_path / "ckpt.bin"
    save_params(path, store)

    fresh = ParamStore(rng=np.random.default_rng(99))
    fresh.param("lin/w", (4, 4))
    fresh.param("lin/b", (4,), init="zeros")
    load_params(path, fresh)
    assert fresh.adam_t == store.adam_t
    np.testing.assert_array_equal(fresh["lin/w"].data, w.data)
    np.testing.assert_array_equal(fresh.adam_m["lin/w"], store.adam_m["lin/w"])
    np.testing.assert_array_equal(fresh.adam_v["lin/b"], store.adam_v["lin/b"])

    # Training continues identically from the restored state.
    def one_step(s):
        out = nn.add(nn.matmul(Tensor(x), s["lin/w"]), s["lin/b"])
        loss = nn.mse_loss(out, Tensor(np.ones_like(out.data)))
        loss.backward()
        adam_step(s, lr=1e-3)
        return float(loss.data)

    assert one_step(store) == one_step(fresh)


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b"NOPE" + b"\x00" * 32)
    with pytest.raises(ValueError, match="magic"):
        load_tensors(path)


def test_missing_param_rejected(tmp_path):
    store = ParamStore(rng=np.random.default_rng(1))
    store.param("w", (2, 2))
    path = tmp_path / "ckpt.bin"
    save_params(path, store)
    bigger = ParamStore(rng=np.random.default_rng(1))
    bigger.param("w", (2, 2))
    bigger.param("extra", (3,))
    with pytest.raises(ValueError, match="missing parameter"):
        load_params(path, bigger)


def test_shape_mismatch_rejected(tmp_path):
    store = ParamStore(rng=np.random.default_rng(1))
    store.param("w", (2, 2))
    path = tmp_path / "ckpt.bin"
    save_params(path, store)
    other = ParamStore(rng=np.random.default_rng(1))
    other.param("w", (3, 2))
    with pytest.raises(ValueError, match="shape mismatch"):
        load_params(path, other)
