"""Binary tensor container used for checkpoints and episode records.

Layout (all integers little-endian):

    magic   4 bytes  b"BGTS"
    version u32      currently 1
    count   u32      number of records
    record:
        name_len u32, name utf-8 bytes
        dtype    u8   (0=f32, 1=f64, 2=u8, 3=i64)
        rank     u8
        dims     u32 * rank
        payload  raw values, little-endian, C order

Round-trips are bit-exact; writers emit records in the order given.
"""

from __future__ import annotations

import io
import struct
from pathlib import Path

import numpy as np

from .optim import ParamStore

MAGIC = b"BGTS"
VERSION = 1

_DTYPE_CODES: dict[int, np.dtype] = {
    0: np.dtype("<f4"),
    1: np.dtype("<f8"),
    2: np.dtype("u1"),
    3: np.dtype("<i8"),
}
_CODE_FOR_KIND = {
    np.dtype(np.float32): 0,
    np.dtype(np.float64): 1,
    np.dtype(np.uint8): 2,
    np.dtype(np.int64): 3,
}


def save_tensors(path: str | Path, tensors: dict[str, np.ndarray]) -> None:
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<II", VERSION, len(tensors)))
    for name, arr in tensors.items():
        arr = np.ascontiguousarray(arr)
        if arr.dtype == np.bool_:
            arr = arr.astype(np.uint8)
        if arr.dtype not in _CODE_FOR_KIND:
            raise ValueError(f"unsupported dtype {arr.dtype} for tensor {name!r}")
        code = _CODE_FOR_KIND[arr.dtype]
        name_b = name.encode("utf-8")
        buf.write(struct.pack("<I", len(name_b)))
        buf.write(name_b)
        buf.write(struct.pack("<BB", code, arr.ndim))
        buf.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        buf.write(arr.astype(_DTYPE_CODES[code], copy=False).tobytes())
    Path(path).write_bytes(buf.getvalue())


def load_tensors(path: str | Path) -> dict[str, np.ndarray]:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise ValueError(f"{path}: bad magic {raw[:4]!r}")
    version, count = struct.unpack_from("<II", raw, 4)
    if version != VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    out: dict[str, np.ndarray] = {}
    off = 12
    for _ in range(count):
        (name_len,) = struct.unpack_from("<I", raw, off)
        off += 4
        name = raw[off:off + name_len].decode("utf-8")
        off += name_len
        code, rank = struct.unpack_from("<BB", raw, off)
        off += 2
        dims = struct.unpack_from(f"<{rank}I", raw, off)
        off += 4 * rank
        dt = _DTYPE_CODES[code]
        n = int(np.prod(dims)) if rank else 1
        arr = np.frombuffer(raw, dtype=dt, count=n, offset=off).reshape(dims)
        off += n * dt.itemsize
        out[name] = arr.copy()
    return out


def save_params(path: str | Path, store: ParamStore) -> None:
    """Checkpoint parameters together with Adam moments and step count."""
    tensors: dict[str, np.ndarray] = {}
    for name, t in store.params.items():
        tensors[name] = t.data
    for name in store.params:
        tensors[f"adam_m/{name}"] = store.adam_m[name]
        tensors[f"adam_v/{name}"] = store.adam_v[name]
    tensors["adam_t"] = np.array([store.adam_t], dtype=np.int64)
    save_tensors(path, tensors)


def load_params(path: str | Path, store: ParamStore) -> None:
    """Restore a checkpoint into an already-built store (shapes must match)."""
    tensors = load_tensors(path)
    for name, t in store.params.items():
        if name not in tensors:
            raise ValueError(f"checkpoint missing parameter {name!r}")
        arr = tensors[name]
        if arr.shape != t.shape:
            raise ValueError(
                f"checkpoint shape mismatch for {name}: {arr.shape} vs {t.shape}"
            )
        t.data = arr.astype(store.dtype, copy=True)
        t.grad = None
        store.adam_m[name] = tensors[f"adam_m/{name}"].astype(store.dtype, copy=True)
        store.adam_v[name] = tensors[f"adam_v/{name}"].astype(store.dtype, copy=True)
    store.adam_t = int(tensors["adam_t"][0])
