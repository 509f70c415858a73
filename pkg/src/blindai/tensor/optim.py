from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .._jit import JIT_ENABLED, njit
from ..errors import StateError


@dataclass
class AdamState:
    step_size: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)


def adam_step(params, state: AdamState) -> AdamState:
    """Bias-corrected Adam update in place; grads are zeroed afterwards."""
    params = list(params)
    missing = [i for i, p in enumerate(params) if p.grad is None]
    if missing:
        raise StateError(f"{len(missing)} parameter(s) have no gradient; run backward first")
    if not state.m:
        state.m = [np.zeros(p.shape) for p in params]
        state.v = [np.zeros(p.shape) for p in params]
    if len(state.m) != len(params) or any(m.shape != p.shape for m, p in zip(state.m, params)):
        raise StateError("Adam accumulators do not match the parameter list")
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1**state.step
    c2 = 1.0 - b2**state.step
    update = _adam_kernel if JIT_ENABLED else _adam_numpy
    for p, m, v in zip(params, state.m, state.v):
        if not p.data.flags.c_contiguous:
            p.data = np.ascontiguousarray(p.data)
        update(p.data.reshape(-1), p.grad.reshape(-1), m.reshape(-1), v.reshape(-1),
               state.step_size, b1, b2, c1, c2, state.eps)
        p.grad.fill(0.0)
    return state


@njit
def _adam_kernel(p, g, m, v, lr, b1, b2, c1, c2, eps):
    for i in range(p.shape[0]):
        m[i] = b1 * m[i] + (1.0 - b1) * g[i]
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i]
        p[i] -= lr * (m[i] / c1) / (np.sqrt(v[i] / c2) + eps)


def _adam_numpy(p, g, m, v, lr, b1, b2, c1, c2, eps):
    m *= b1
    m += (1.0 - b1) * g
    v *= b2
    v += (1.0 - b2) * g * g
    p -= lr * (m / c1) / (np.sqrt(v / c2) + eps)


def clip_grad_norm(params, max_norm: float) -> float:
    """Scale gradients so their global L2 norm is at most ``max_norm``; returns the pre-clip norm."""
    grads = [p.grad for p in params if p.grad is not None]
    total = float(np.sqrt(sum(float((g * g).sum()) for g in grads)))
    if max_norm > 0 and total > max_norm:
        scale = max_norm / (total + 1e-12)
        for g in grads:
            g *= scale
    return total
