"""Reverse-mode autodiff over dense float64 numpy arrays.

Every differentiable op builds a node holding its parents and a closure that
maps the output gradient to parent gradients. There is no broadcasting:
binary elementwise ops demand identical shapes (a Python scalar is the only
exception), and reshapes are explicit.
"""
from __future__ import annotations

import contextlib

import numpy as np

from ..errors import InvalidArgument, ShapeError, StateError

_GRAD_ENABLED = True


@contextlib.contextmanager
def no_grad():
    global _GRAD_ENABLED
    prev = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = prev


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "name")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad
        self._parents: tuple = ()
        self._backward = None
        self.name = name

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data)

    def __repr__(self):
        tag = f" {self.name}" if self.name else ""
        return f"Tensor{tag}(shape={self.shape}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return add(neg(self), other)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __neg__(self):
        return neg(self)

    def backward(self):
        backward(self)


def _node(data, parents, backward_fn) -> Tensor:
    out = Tensor(data)
    if _GRAD_ENABLED and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = parents
        out._backward = backward_fn
    return out


def _acc(t: Tensor, g) -> None:
    if not t.requires_grad:
        return
    if t.grad is None:
        t.grad = np.array(g, dtype=np.float64, copy=True)
    else:
        t.grad += g


def _same_shape(op, a: Tensor, b: Tensor):
    if a.shape != b.shape:
        raise ShapeError(op, a.shape, b.shape)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


# -- elementwise --------------------------------------------------------------


def add(a: Tensor, b) -> Tensor:
    if not isinstance(b, Tensor):
        c = float(b)
        return _node(a.data + c, (a,), lambda g: _acc(a, g))
    _same_shape("add", a, b)

    def bw(g):
        _acc(a, g)
        _acc(b, g)

    return _node(a.data + b.data, (a, b), bw)


def sub(a: Tensor, b) -> Tensor:
    if not isinstance(b, Tensor):
        return add(a, -float(b))
    _same_shape("sub", a, b)

    def bw(g):
        _acc(a, g)
        _acc(b, -g)

    return _node(a.data - b.data, (a, b), bw)


def neg(a: Tensor) -> Tensor:
    return _node(-a.data, (a,), lambda g: _acc(a, -g))


def mul(a: Tensor, b) -> Tensor:
    if not isinstance(b, Tensor):
        c = float(b)
        return _node(a.data * c, (a,), lambda g: _acc(a, g * c))
    _same_shape("mul", a, b)

    def bw(g):
        _acc(a, g * b.data)
        _acc(b, g * a.data)

    return _node(a.data * b.data, (a, b), bw)


def exp(a: Tensor) -> Tensor:
    y = np.exp(a.data)
    return _node(y, (a,), lambda g: _acc(a, g * y))


def log(a: Tensor) -> Tensor:
    return _node(np.log(a.data), (a,), lambda g: _acc(a, g / a.data))


def square(a: Tensor) -> Tensor:
    return _node(a.data * a.data, (a,), lambda g: _acc(a, 2.0 * g * a.data))


def relu(a: Tensor) -> Tensor:
    mask = a.data > 0
    return _node(np.where(mask, a.data, 0.0), (a,), lambda g: _acc(a, g * mask))


def tanh(a: Tensor) -> Tensor:
    y = np.tanh(a.data)
    return _node(y, (a,), lambda g: _acc(a, g * (1.0 - y * y)))


def sigmoid(a: Tensor) -> Tensor:
    y = _sigmoid(a.data)
    return _node(y, (a,), lambda g: _acc(a, g * y * (1.0 - y)))


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def clip(a: Tensor, lo: float, hi: float) -> Tensor:
    mask = (a.data >= lo) & (a.data <= hi)
    return _node(np.clip(a.data, lo, hi), (a,), lambda g: _acc(a, g * mask))


def minimum(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise min; on ties the gradient goes to ``a``."""
    _same_shape("minimum", a, b)
    pick_a = a.data <= b.data

    def bw(g):
        _acc(a, g * pick_a)
        _acc(b, g * ~pick_a)

    return _node(np.where(pick_a, a.data, b.data), (a, b), bw)


# -- reductions and shape -----------------------------------------------------


def sum(a: Tensor) -> Tensor:  # noqa: A001
    return _node(np.array(a.data.sum()), (a,), lambda g: _acc(a, np.full(a.shape, float(g))))


def mean(a: Tensor) -> Tensor:
    n = a.size
    return _node(np.array(a.data.mean()), (a,), lambda g: _acc(a, np.full(a.shape, float(g) / n)))


def weighted_mean(a: Tensor, w: np.ndarray) -> Tensor:
    """sum(a * w) / sum(w) with constant weights (used for padded sequences)."""
    w = np.asarray(w, dtype=np.float64)
    if w.shape != a.shape:
        raise ShapeError("weighted_mean", a.shape, w.shape)
    total = w.sum()
    if total <= 0:
        raise InvalidArgument("weighted_mean needs positive total weight")
    return _node(np.array((a.data * w).sum() / total), (a,), lambda g: _acc(a, float(g) * w / total))


def reshape(a: Tensor, shape) -> Tensor:
    shape = tuple(shape)
    if int(np.prod(shape)) != a.size:
        raise ShapeError("reshape", shape, a.shape)
    return _node(a.data.reshape(shape), (a,), lambda g: _acc(a, g.reshape(a.shape)))


def flatten(a: Tensor, start: int = 1) -> Tensor:
    return reshape(a, a.shape[:start] + (int(np.prod(a.shape[start:])),))


def rows(a: Tensor, start: int, stop: int) -> Tensor:
    """Slice along the leading axis."""

    def bw(g):
        full = np.zeros(a.shape)
        full[start:stop] = g
        _acc(a, full)

    return _node(a.data[start:stop], (a,), bw)


def concat_rows(parts: list) -> Tensor:
    sizes = [p.shape[0] for p in parts]
    tail = parts[0].shape[1:]
    for p in parts:
        if p.shape[1:] != tail:
            raise ShapeError("concat_rows", tail, p.shape[1:])
    offsets = np.cumsum([0] + sizes)

    def bw(g):
        for p, lo, hi in zip(parts, offsets[:-1], offsets[1:]):
            _acc(p, g[lo:hi])

    return _node(np.concatenate([p.data for p in parts], axis=0), tuple(parts), bw)


def take_last(a: Tensor, index) -> Tensor:
    """out[i] = a[i, index[i]] for a 2-D tensor."""
    index = np.asarray(index, dtype=np.int64)
    if a.ndim != 2 or index.shape != (a.shape[0],):
        raise ShapeError("take_last", (a.shape[0],), index.shape)
    r = np.arange(a.shape[0])

    def bw(g):
        full = np.zeros(a.shape)
        full[r, index] = g
        _acc(a, full)

    return _node(a.data[r, index], (a,), bw)


# -- softmax family -----------------------------------------------------------


def _check_finite(x, what):
    if not np.all(np.isfinite(x)):
        raise InvalidArgument(f"{what} must be finite")


def log_softmax(a: Tensor) -> Tensor:
    _check_finite(a.data, "logits")
    shifted = a.data - a.data.max(axis=-1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    y = shifted - lse
    p = np.exp(y)
    return _node(y, (a,), lambda g: _acc(a, g - p * g.sum(axis=-1, keepdims=True)))


def softmax(a: Tensor) -> Tensor:
    _check_finite(a.data, "logits")
    e = np.exp(a.data - a.data.max(axis=-1, keepdims=True))
    y = e / e.sum(axis=-1, keepdims=True)
    return _node(y, (a,), lambda g: _acc(a, y * (g - (g * y).sum(axis=-1, keepdims=True))))


def entropy_from_logp(logp: Tensor) -> Tensor:
    """Row entropies -sum(p * log p) from log-probabilities."""
    p = np.exp(logp.data)
    h = -(p * logp.data).sum(axis=-1)

    def bw(g):
        # d/dlogp_j of -sum p log p = -p_j (log p_j + 1)
        _acc(logp, -g[..., None] * p * (logp.data + 1.0))

    return _node(h, (logp,), bw)


# -- fused layer primitives ---------------------------------------------------


def linear(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """x (B, in) -> x @ w.T + b with w (out, in)."""
    if x.ndim != 2 or x.shape[1] != w.shape[1]:
        raise ShapeError("linear input", (x.shape[0] if x.ndim else 1, w.shape[1]), x.shape)

    def bw(g):
        _acc(x, g @ w.data)
        _acc(w, g.T @ x.data)
        _acc(b, g.sum(axis=0))

    return _node(x.data @ w.data.T + b.data, (x, w, b), bw)


def conv1d(x: Tensor, w: Tensor, b: Tensor, stride: int, padding: int) -> Tensor:
    """Cross-correlation of x (B, C, L) with w (O, C, K)."""
    bsz, c, length = x.shape
    o, _, k = w.shape
    xp = np.pad(x.data, ((0, 0), (0, 0), (padding, padding))) if padding else x.data
    lout = (xp.shape[2] - k) // stride + 1
    cols = np.empty((bsz, lout, c, k))
    span = stride * (lout - 1) + 1
    for j in range(k):
        cols[:, :, :, j] = xp[:, :, j : j + span : stride].transpose(0, 2, 1)
    cols2 = cols.reshape(bsz * lout, c * k)
    w2 = w.data.reshape(o, c * k)
    out = (cols2 @ w2.T + b.data).reshape(bsz, lout, o).transpose(0, 2, 1)

    def bw(g):
        g2 = g.transpose(0, 2, 1).reshape(bsz * lout, o)
        _acc(w, (g2.T @ cols2).reshape(w.shape))
        _acc(b, g2.sum(axis=0))
        if x.requires_grad:
            dcols = (g2 @ w2).reshape(bsz, lout, c, k)
            dxp = np.zeros(xp.shape)
            for j in range(k):
                dxp[:, :, j : j + span : stride] += dcols[:, :, :, j].transpose(0, 2, 1)
            _acc(x, dxp[:, :, padding : padding + length])

    return _node(np.ascontiguousarray(out), (x, w, b), bw)


def conv2d(x: Tensor, w: Tensor, b: Tensor, stride, padding) -> Tensor:
    """Cross-correlation of x (B, C, H, W) with w (O, C, KH, KW)."""
    bsz, c, h, wd = x.shape
    o, _, kh, kw = w.shape
    sh, sw = stride
    ph, pw = padding
    xp = np.pad(x.data, ((0, 0), (0, 0), (ph, ph), (pw, pw))) if (ph or pw) else x.data
    ho = (xp.shape[2] - kh) // sh + 1
    wo = (xp.shape[3] - kw) // sw + 1
    span_h = sh * (ho - 1) + 1
    span_w = sw * (wo - 1) + 1
    cols = np.empty((bsz, ho, wo, c, kh, kw))
    for i in range(kh):
        for j in range(kw):
            cols[:, :, :, :, i, j] = xp[:, :, i : i + span_h : sh, j : j + span_w : sw].transpose(0, 2, 3, 1)
    cols2 = cols.reshape(bsz * ho * wo, c * kh * kw)
    w2 = w.data.reshape(o, c * kh * kw)
    out = (cols2 @ w2.T + b.data).reshape(bsz, ho, wo, o).transpose(0, 3, 1, 2)

    def bw(g):
        g2 = g.transpose(0, 2, 3, 1).reshape(bsz * ho * wo, o)
        _acc(w, (g2.T @ cols2).reshape(w.shape))
        _acc(b, g2.sum(axis=0))
        if x.requires_grad:
            dcols = (g2 @ w2).reshape(bsz, ho, wo, c, kh, kw)
            dxp = np.zeros(xp.shape)
            for i in range(kh):
                for j in range(kw):
                    dxp[:, :, i : i + span_h : sh, j : j + span_w : sw] += dcols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
            _acc(x, dxp[:, :, ph : ph + h, pw : pw + wd])

    return _node(np.ascontiguousarray(out), (x, w, b), bw)


def gru_cell(x: Tensor, h: Tensor, w_ih: Tensor, w_hh: Tensor, b_ih: Tensor, b_hh: Tensor) -> Tensor:
    """One GRU step with gate order (reset, update, candidate).

    r = sig(Wr x + Ur h), z = sig(Wz x + Uz h), n = tanh(Wn x + r * (Un h)),
    h' = (1 - z) * n + z * h, each pre-activation carrying its own biases.
    """
    hid = h.shape[1]
    gi = x.data @ w_ih.data.T + b_ih.data
    gh = h.data @ w_hh.data.T + b_hh.data
    r = _sigmoid(gi[:, :hid] + gh[:, :hid])
    z = _sigmoid(gi[:, hid : 2 * hid] + gh[:, hid : 2 * hid])
    ghn = gh[:, 2 * hid :]
    n = np.tanh(gi[:, 2 * hid :] + r * ghn)
    out = (1.0 - z) * n + z * h.data

    def bw(g):
        dn = g * (1.0 - z) * (1.0 - n * n)
        dz = g * (h.data - n) * z * (1.0 - z)
        dr = dn * ghn * r * (1.0 - r)
        dgi = np.concatenate([dr, dz, dn], axis=1)
        dgh = np.concatenate([dr, dz, dn * r], axis=1)
        _acc(w_ih, dgi.T @ x.data)
        _acc(b_ih, dgi.sum(axis=0))
        _acc(w_hh, dgh.T @ h.data)
        _acc(b_hh, dgh.sum(axis=0))
        _acc(x, dgi @ w_ih.data)
        _acc(h, dgh @ w_hh.data + g * z)

    return _node(out, (x, h, w_ih, w_hh, b_ih, b_hh), bw)


def gru_sequence(x: Tensor, h0: Tensor, w_ih: Tensor, w_hh: Tensor, b_ih: Tensor, b_hh: Tensor) -> Tensor:
    """GRU unrolled over x (L, B, in) from h0 (B, H); returns all states (L, B, H).

    Same maths as ``gru_cell`` applied L times, but the input projection and
    the weight gradients are computed with one matmul over the whole block.
    """
    steps, bsz, n_in = x.shape
    hid = h0.shape[1]
    gi_all = (x.data.reshape(steps * bsz, n_in) @ w_ih.data.T + b_ih.data).reshape(steps, bsz, 3 * hid)
    hs = np.empty((steps + 1, bsz, hid))
    hs[0] = h0.data
    rs = np.empty((steps, bsz, hid))
    zs = np.empty_like(rs)
    ns = np.empty_like(rs)
    ghns = np.empty_like(rs)
    for t in range(steps):
        gi = gi_all[t]
        gh = hs[t] @ w_hh.data.T + b_hh.data
        r = _sigmoid(gi[:, :hid] + gh[:, :hid])
        z = _sigmoid(gi[:, hid : 2 * hid] + gh[:, hid : 2 * hid])
        ghn = gh[:, 2 * hid :]
        n = np.tanh(gi[:, 2 * hid :] + r * ghn)
        hs[t + 1] = (1.0 - z) * n + z * hs[t]
        rs[t], zs[t], ns[t], ghns[t] = r, z, n, ghn

    def bw(g):
        dgi = np.empty((steps, bsz, 3 * hid))
        dgh = np.empty_like(dgi)
        dh = np.zeros((bsz, hid))
        for t in range(steps - 1, -1, -1):
            dh = dh + g[t]
            r, z, n = rs[t], zs[t], ns[t]
            dn = dh * (1.0 - z) * (1.0 - n * n)
            dz = dh * (hs[t] - n) * z * (1.0 - z)
            dr = dn * ghns[t] * r * (1.0 - r)
            dgi[t, :, :hid] = dr
            dgi[t, :, hid : 2 * hid] = dz
            dgi[t, :, 2 * hid :] = dn
            dgh[t, :, : 2 * hid] = dgi[t, :, : 2 * hid]
            dgh[t, :, 2 * hid :] = dn * r
            dh = dgh[t] @ w_hh.data + dh * z
        dgi2 = dgi.reshape(steps * bsz, 3 * hid)
        dgh2 = dgh.reshape(steps * bsz, 3 * hid)
        _acc(w_ih, dgi2.T @ x.data.reshape(steps * bsz, n_in))
        _acc(b_ih, dgi2.sum(axis=0))
        _acc(w_hh, dgh2.T @ hs[:-1].reshape(steps * bsz, hid))
        _acc(b_hh, dgh2.sum(axis=0))
        if x.requires_grad:
            _acc(x, (dgi2 @ w_ih.data).reshape(x.shape))
        _acc(h0, dh)

    return _node(hs[1:].copy(), (x, h0, w_ih, w_hh, b_ih, b_hh), bw)


# -- backward -----------------------------------------------------------------


def _topo(root: Tensor) -> list:
    order, seen, stack = [], set(), [(root, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in seen:
                stack.append((p, False))
    return order


def backward(loss: Tensor, params=None) -> None:
    """Populate ``.grad`` on every tensor reachable from a scalar ``loss``.

    Gradients accumulate into existing ``.grad`` arrays. When ``params`` is
    given, any of them left untouched receives an explicit zero gradient.
    The graph is released afterwards, so a second call raises StateError.
    """
    if loss.size != 1:
        raise InvalidArgument(f"backward needs a scalar loss, got shape {loss.shape}")
    if loss._backward is None:
        raise StateError("loss carries no recorded computation graph")
    order = _topo(loss)
    for t in order:
        if t._parents:
            t.grad = None
    loss.grad = np.ones(loss.shape)
    for node in reversed(order):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)
    for node in order:
        if node._parents:
            node.grad = None
            node._parents = ()
            node._backward = None
    if params is not None:
        for p in params:
            if p.grad is None:
                p.grad = np.zeros(p.shape)
