"""Dense-tensor reverse-mode differentiation over numpy arrays.

Each op returns a new Tensor holding the forward value plus a closure
that routes the upstream gradient to the op's inputs; backward() runs
the closures in reverse topological order. Gradients accumulate, so
shared subgraphs (residual skips, reused embeddings) are handled
naturally. Only the ops the policy network needs exist here.

Dtype follows the input arrays: build parameters in float32 for
training, float64 for finite-difference checks. Leaf tensors skip
gradient accumulation unless created with requires_grad=True, which
saves the input-gradient scatter of the first conv layer.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_backward", "_parents")

    def __init__(self, data, requires_grad: bool = False, parents=()):
        self.data = data if isinstance(data, np.ndarray) else np.asarray(data)
        self.grad = None
        self.requires_grad = requires_grad
        self._backward = None
        self._parents = parents

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype})"

    def _needs_grad(self) -> bool:
        return self.requires_grad or bool(self._parents)

    def _accumulate(self, g: np.ndarray) -> None:
        if not self._needs_grad():
            return
        if self.grad is None:
            self.grad = g.copy()
        else:
            self.grad += g

    def backward(self) -> None:
        """Backpropagate from a scalar; fills .grad of every ancestor."""
        if self.data.size != 1:
            raise ValueError(f"backward() needs a scalar, got shape {self.shape}")
        # Iterative DFS; window graphs get deep enough to bother recursion.
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None:
                node._backward()


def _shapes(*ts) -> str:
    return " vs ".join(str(t.shape) for t in ts)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(np.asarray(x))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul shape mismatch: {_shapes(a, b)}")
    out = Tensor(a.data @ b.data, parents=(a, b))

    def _bw():
        if a._needs_grad():
            a._accumulate(out.grad @ b.data.T)
        if b._needs_grad():
            b._accumulate(a.data.T @ out.grad)

    out._backward = _bw
    return out


def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise add; also accepts a trailing-axis bias vector for b."""
    bias = b.data.ndim == 1 and a.data.ndim > 1 and a.shape[-1] == b.shape[0]
    if not bias and a.shape != b.shape:
        raise ValueError(f"add shape mismatch: {_shapes(a, b)}")
    out = Tensor(a.data + b.data, parents=(a, b))

    def _bw():
        a._accumulate(out.grad)
        if b._needs_grad():
            if bias:
                b._accumulate(out.grad.reshape(-1, b.shape[0]).sum(axis=0))
            else:
                b._accumulate(out.grad)

    out._backward = _bw
    return out


def mul(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ValueError(f"mul shape mismatch: {_shapes(a, b)}")
    out = Tensor(a.data * b.data, parents=(a, b))

    def _bw():
        a._accumulate(out.grad * b.data)
        b._accumulate(out.grad * a.data)

    out._backward = _bw
    return out


def sub(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ValueError(f"sub shape mismatch: {_shapes(a, b)}")
    out = Tensor(a.data - b.data, parents=(a, b))

    def _bw():
        a._accumulate(out.grad)
        if b._needs_grad():
            b._accumulate(-out.grad)

    out._backward = _bw
    return out


def scale(a: Tensor, s: float) -> Tensor:
    factor = a.data.dtype.type(s)
    out = Tensor(a.data * factor, parents=(a,))

    def _bw():
        a._accumulate(out.grad * factor)

    out._backward = _bw
    return out


def relu(a: Tensor) -> Tensor:
    out = Tensor(np.maximum(a.data, 0), parents=(a,))

    def _bw():
        a._accumulate(out.grad * (a.data > 0))

    out._backward = _bw
    return out


def tanh(a: Tensor) -> Tensor:
    out = Tensor(np.tanh(a.data), parents=(a,))

    def _bw():
        a._accumulate(out.grad * (1.0 - out.data * out.data))

    out._backward = _bw
    return out


def sigmoid(a: Tensor) -> Tensor:
    # Split by sign to stay overflow-free in float32.
    x = a.data
    out_data = np.empty_like(x)
    pos = x >= 0
    out_data[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out_data[~pos] = ex / (1.0 + ex)
    out = Tensor(out_data, parents=(a,))

    def _bw():
        a._accumulate(out.grad * out.data * (1.0 - out.data))

    out._backward = _bw
    return out


def concat(ts: Sequence[Tensor], axis: int = -1) -> Tensor:
    if not ts:
        raise ValueError("concat needs at least one tensor")
    out = Tensor(np.concatenate([t.data for t in ts], axis=axis), parents=tuple(ts))
    sizes = [t.shape[axis] for t in ts]

    def _bw():
        offset = 0
        for t, n in zip(ts, sizes):
            if t._needs_grad():
                idx = [slice(None)] * out.data.ndim
                idx[axis] = slice(offset, offset + n)
                t._accumulate(out.grad[tuple(idx)])
            offset += n

    out._backward = _bw
    return out


def split(a: Tensor, n_chunks: int, axis: int = -1) -> list[Tensor]:
    """Split into equal chunks along an axis; each chunk backprops into
    its slice of the parent."""
    total = a.shape[axis]
    if total % n_chunks != 0:
        raise ValueError(f"cannot split axis of size {total} into {n_chunks}")
    size = total // n_chunks
    outs = []
    for i in range(n_chunks):
        idx = [slice(None)] * a.data.ndim
        idx[axis] = slice(i * size, (i + 1) * size)
        idx = tuple(idx)
        piece = Tensor(a.data[idx].copy(), parents=(a,))

        def _bw(piece=piece, idx=idx):
            if not a._needs_grad():
                return
            if a.grad is None:
                a.grad = np.zeros_like(a.data)
            a.grad[idx] += piece.grad

        piece._backward = _bw
        outs.append(piece)
    return outs


def reshape(a: Tensor, shape) -> Tensor:
    out = Tensor(a.data.reshape(shape), parents=(a,))

    def _bw():
        a._accumulate(out.grad.reshape(a.shape))

    out._backward = _bw
    return out


def mean(a: Tensor, axis=None) -> Tensor:
    out = Tensor(a.data.mean(axis=axis), parents=(a,))
    if axis is None:
        count = a.data.size
    else:
        axes = axis if isinstance(axis, tuple) else (axis,)
        count = int(np.prod([a.shape[ax] for ax in axes]))

    def _bw():
        g = out.grad
        if axis is not None:
            g = np.expand_dims(g, axis)
        a._accumulate(np.broadcast_to(g, a.shape) / a.data.dtype.type(count))

    out._backward = _bw
    return out


def mse_loss(pred: Tensor, target: Tensor) -> Tensor:
    """Mean over all entries of the squared error."""
    if pred.shape != target.shape:
        raise ValueError(f"mse_loss shape mismatch: {_shapes(pred, target)}")
    d = sub(pred, target)
    return mean(mul(d, d))


def _im2col2d(xp: np.ndarray, kh: int, kw: int, sh: int, sw: int):
    # (N, C, Hp, Wp) -> flat patch matrix (N*Ho*Wo, C*kh*kw).
    v = np.lib.stride_tricks.sliding_window_view(xp, (kh, kw), axis=(2, 3))
    v = v[:, :, ::sh, ::sw, :, :]
    n, c, ho, wo = v.shape[:4]
    patches = np.ascontiguousarray(v.transpose(0, 2, 3, 1, 4, 5))
    return patches.reshape(n * ho * wo, c * kh * kw), ho, wo


def conv2d(x: Tensor, w: Tensor, b: Tensor | None = None,
           stride: int = 1, pad: int = 0) -> Tensor:
    """NCHW convolution. w is (out_ch, in_ch, kh, kw), b is (out_ch,)."""
    if x.data.ndim != 4 or w.data.ndim != 4 or x.shape[1] != w.shape[1]:
        raise ValueError(f"conv2d shape mismatch: {_shapes(x, w)}")
    n, c, h, wd = x.shape
    oc, _, kh, kw = w.shape
    xp = np.pad(x.data, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else x.data
    if xp.shape[2] < kh or xp.shape[3] < kw:
        raise ValueError(f"conv2d input {x.shape} smaller than kernel {w.shape}")
    cols, ho, wo = _im2col2d(xp, kh, kw, stride, stride)
    wmat = w.data.reshape(oc, -1).T
    out_data = cols @ wmat
    if b is not None:
        out_data += b.data
    out_data = np.ascontiguousarray(out_data.reshape(n, ho, wo, oc).transpose(0, 3, 1, 2))
    parents = (x, w) if b is None else (x, w, b)
    out = Tensor(out_data, parents=parents)

    def _bw():
        gmat = out.grad.transpose(0, 2, 3, 1).reshape(-1, oc)
        w._accumulate((cols.T @ gmat).T.reshape(w.shape))
        if b is not None:
            b._accumulate(gmat.sum(axis=0))
        if not x._needs_grad():
            return
        gcols = (gmat @ wmat.T).reshape(n, ho, wo, c, kh, kw)
        gxp = np.zeros((n, c, h + 2 * pad, wd + 2 * pad), dtype=x.data.dtype)
        # Scatter one kernel offset at a time; strided slices never overlap
        # within an offset, so plain += is exact.
        for i in range(kh):
            for j in range(kw):
                gxp[:, :, i:i + ho * stride:stride, j:j + wo * stride:stride] += \
                    gcols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
        x._accumulate(gxp[:, :, pad:pad + h, pad:pad + wd] if pad else gxp)

    out._backward = _bw
    return out


def conv1d(x: Tensor, w: Tensor, b: Tensor | None = None, stride: int = 1) -> Tensor:
    """Channels-first 1D convolution, valid padding. x is (N, C, L),
    w is (out_ch, in_ch, k)."""
    if x.data.ndim != 3 or w.data.ndim != 3 or x.shape[1] != w.shape[1]:
        raise ValueError(f"conv1d shape mismatch: {_shapes(x, w)}")
    n, c, length = x.shape
    oc, _, k = w.shape
    if length < k:
        raise ValueError(f"conv1d input {x.shape} shorter than kernel {w.shape}")
    v = np.lib.stride_tricks.sliding_window_view(x.data, k, axis=2)[:, :, ::stride, :]
    lo = v.shape[2]
    cols = np.ascontiguousarray(v.transpose(0, 2, 1, 3)).reshape(n * lo, c * k)
    wmat = w.data.reshape(oc, -1).T
    out_data = cols @ wmat
    if b is not None:
        out_data += b.data
    out_data = np.ascontiguousarray(out_data.reshape(n, lo, oc).transpose(0, 2, 1))
    parents = (x, w) if b is None else (x, w, b)
    out = Tensor(out_data, parents=parents)

    def _bw():
        gmat = out.grad.transpose(0, 2, 1).reshape(-1, oc)
        w._accumulate((cols.T @ gmat).T.reshape(w.shape))
        if b is not None:
            b._accumulate(gmat.sum(axis=0))
        if not x._needs_grad():
            return
        gcols = (gmat @ wmat.T).reshape(n, lo, c, k)
        gx = np.zeros_like(x.data)
        for j in range(k):
            gx[:, :, j:j + lo * stride:stride] += gcols[:, :, :, j].transpose(0, 2, 1)
        x._accumulate(gx)

    out._backward = _bw
    return out


def lstm_cell(x: Tensor, h: Tensor, c: Tensor,
              wx: Tensor, wh: Tensor, b: Tensor) -> tuple[Tensor, Tensor]:
    """One LSTM step. Gate layout along the last axis is [i, f, g, o];
    wx is (in_dim, 4*hidden), wh is (hidden, 4*hidden), b is (4*hidden,)."""
    gates = add(add(matmul(x, wx), matmul(h, wh)), b)
    i, f, g, o = split(gates, 4, axis=-1)
    i, f, o = sigmoid(i), sigmoid(f), sigmoid(o)
    g = tanh(g)
    c_new = add(mul(f, c), mul(i, g))
    h_new = mul(o, tanh(c_new))
    return h_new, c_new
