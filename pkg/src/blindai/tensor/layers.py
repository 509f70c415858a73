"""Layer objects with declared per-sample shapes.

Layers accept either a single sample shaped exactly like ``in_shape`` or a
batch with one extra leading axis.
"""
from __future__ import annotations

import numpy as np

from ..errors import InvalidArgument, ShapeError
from . import core
from .core import Tensor


def conv_out_len(n: int, kernel: int, stride: int, padding: int) -> int:
    return (n + 2 * padding - kernel) // stride + 1


def _uniform(rng, shape, fan_in):
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


def _orthogonal(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


class Module:
    """Base class collecting parameters from attributes in definition order."""

    def named_parameters(self, prefix: str = "") -> dict:
        out = {}
        for key, val in vars(self).items():
            if isinstance(val, Tensor) and val.requires_grad:
                out[prefix + key] = val
            elif isinstance(val, Module):
                out.update(val.named_parameters(prefix + key + "."))
        return out

    def parameters(self) -> list:
        return list(self.named_parameters().values())

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.grad = None

    def param_count(self) -> int:
        return sum(p.size for p in self.parameters())


class Layer(Module):
    kind = ""
    in_shape: tuple | None = None
    out_shape: tuple | None = None

    def _batched(self, x: Tensor) -> tuple[Tensor, bool]:
        if self.in_shape is None:
            return x, False
        n = len(self.in_shape)
        if x.ndim == n and x.shape == self.in_shape:
            return core.reshape(x, (1,) + x.shape), True
        if x.ndim == n + 1 and x.shape[1:] == self.in_shape:
            return x, False
        raise ShapeError(f"{self.kind} input", self.in_shape, x.shape)

    def _unbatch(self, y: Tensor, squeeze: bool) -> Tensor:
        return core.reshape(y, y.shape[1:]) if squeeze else y

    def __call__(self, x: Tensor) -> Tensor:
        xb, squeeze = self._batched(x)
        return self._unbatch(self._forward(xb), squeeze)


class Linear(Layer):
    kind = "linear"

    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator | None = None):
        rng = rng or np.random.default_rng(0)
        self.in_shape = (in_features,)
        self.out_shape = (out_features,)
        self.weight = Tensor(_uniform(rng, (out_features, in_features), in_features), requires_grad=True)
        self.bias = Tensor(np.zeros(out_features), requires_grad=True)

    def _forward(self, x):
        return core.linear(x, self.weight, self.bias)


class Conv1d(Layer):
    kind = "conv1d"

    def __init__(self, in_channels, out_channels, kernel, stride=1, padding=0, in_length=None, rng=None):
        rng = rng or np.random.default_rng(0)
        if in_length is None:
            raise InvalidArgument("Conv1d needs its input length to declare shapes")
        self.stride, self.padding, self.kernel = int(stride), int(padding), int(kernel)
        lout = conv_out_len(in_length, kernel, stride, padding)
        if lout < 1:
            raise InvalidArgument(f"conv1d kernel {kernel} does not fit input length {in_length}")
        self.in_shape = (in_channels, in_length)
        self.out_shape = (out_channels, lout)
        fan_in = in_channels * kernel
        self.weight = Tensor(_uniform(rng, (out_channels, in_channels, kernel), fan_in), requires_grad=True)
        self.bias = Tensor(np.zeros(out_channels), requires_grad=True)

    def _forward(self, x):
        return core.conv1d(x, self.weight, self.bias, self.stride, self.padding)


class Conv2d(Layer):
    kind = "conv2d"

    def __init__(self, in_channels, out_channels, kernel, stride=(1, 1), padding=(0, 0), in_hw=None, rng=None):
        rng = rng or np.random.default_rng(0)
        if in_hw is None:
            raise InvalidArgument("Conv2d needs its input height/width to declare shapes")
        self.kernel, self.stride, self.padding = tuple(kernel), tuple(stride), tuple(padding)
        ho = conv_out_len(in_hw[0], self.kernel[0], self.stride[0], self.padding[0])
        wo = conv_out_len(in_hw[1], self.kernel[1], self.stride[1], self.padding[1])
        if ho < 1 or wo < 1:
            raise InvalidArgument(f"conv2d kernel {kernel} does not fit input {tuple(in_hw)}")
        self.in_shape = (in_channels, in_hw[0], in_hw[1])
        self.out_shape = (out_channels, ho, wo)
        fan_in = in_channels * self.kernel[0] * self.kernel[1]
        self.weight = Tensor(_uniform(rng, (out_channels, in_channels) + self.kernel, fan_in), requires_grad=True)
        self.bias = Tensor(np.zeros(out_channels), requires_grad=True)

    def _forward(self, x):
        return core.conv2d(x, self.weight, self.bias, self.stride, self.padding)


class GRU(Layer):
    kind = "gru"

    def __init__(self, input_size: int, hidden_size: int, rng=None):
        rng = rng or np.random.default_rng(0)
        self.in_shape = (input_size,)
        self.out_shape = (hidden_size,)
        self.hidden_size = hidden_size
        self.weight_ih = Tensor(_uniform(rng, (3 * hidden_size, input_size), input_size), requires_grad=True)
        self.weight_hh = Tensor(
            np.concatenate([_orthogonal(rng, hidden_size) for _ in range(3)]), requires_grad=True
        )
        self.bias_ih = Tensor(np.zeros(3 * hidden_size), requires_grad=True)
        self.bias_hh = Tensor(np.zeros(3 * hidden_size), requires_grad=True)

    def initial_hidden(self, batch: int | None = None) -> Tensor:
        shape = (self.hidden_size,) if batch is None else (batch, self.hidden_size)
        return Tensor(np.zeros(shape))

    def step(self, x: Tensor, h: Tensor) -> Tensor:
        xb, squeeze = self._batched(x)
        hb = core.reshape(h, (1,) + h.shape) if squeeze else h
        if hb.shape != (xb.shape[0], self.hidden_size):
            raise ShapeError("gru hidden", (xb.shape[0], self.hidden_size), h.shape)
        out = core.gru_cell(xb, hb, self.weight_ih, self.weight_hh, self.bias_ih, self.bias_hh)
        return self._unbatch(out, squeeze)

    def sequence(self, x: Tensor, h0: Tensor) -> Tensor:
        """Unroll over x (L, B, in); returns hidden states (L, B, H)."""
        if x.ndim != 3 or x.shape[2] != self.in_shape[0]:
            raise ShapeError("gru sequence input", ("L", "B", self.in_shape[0]), x.shape)
        if h0.shape != (x.shape[1], self.hidden_size):
            raise ShapeError("gru hidden", (x.shape[1], self.hidden_size), h0.shape)
        return core.gru_sequence(x, h0, self.weight_ih, self.weight_hh, self.bias_ih, self.bias_hh)

    def __call__(self, x, h=None):
        if h is None:
            raise InvalidArgument("gru layer needs a hidden state")
        return self.step(x, h)


class ReLU(Layer):
    kind = "relu"

    def __call__(self, x):
        return core.relu(x)


class Softmax(Layer):
    kind = "softmax"

    def __call__(self, x):
        return core.softmax(x)


def forward(layer: Layer, x: Tensor, hidden: Tensor | None = None):
    """Run one layer. Returns ``(output, new_hidden)``; ``new_hidden`` is None except for GRU."""
    if layer.kind == "gru":
        if hidden is None:
            raise InvalidArgument("gru forward requires a hidden state")
        h = layer.step(x, hidden)
        return h, h
    if hidden is not None:
        raise InvalidArgument(f"{layer.kind} layer takes no hidden state")
    y = layer(x)
    if layer.out_shape is not None:
        got = y.shape[-len(layer.out_shape):]
        if got != layer.out_shape:
            raise ShapeError(f"{layer.kind} output", layer.out_shape, got)
    return y, None


def softmax(logits: Tensor) -> Tensor:
    return core.softmax(logits)
