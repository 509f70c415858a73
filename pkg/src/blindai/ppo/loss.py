"""Clipped-surrogate PPO loss over GRU sequence chunks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgument
from ..tensor import core
from ..tensor.core import Tensor
from .buffer import RolloutBuffer
from .net import PolicyNet


def clipped_surrogate(ratio, advantage, eps: float):
    """Plain-number version of the per-sample objective min(rA, clip(r)A)."""
    ratio = np.asarray(ratio, dtype=np.float64)
    advantage = np.asarray(advantage, dtype=np.float64)
    return np.minimum(ratio * advantage, np.clip(ratio, 1.0 - eps, 1.0 + eps) * advantage)


@dataclass
class Minibatch:
    """Time-major block of ``B`` chunks of length ``L``; padded slots have mask 0."""

    obs: np.ndarray  # (L, B, *obs_shape)
    h0: np.ndarray  # (B, H)
    actions: np.ndarray  # (L, B)
    logp_old: np.ndarray
    advantages: np.ndarray
    returns: np.ndarray
    mask: np.ndarray

    @property
    def n_valid(self) -> int:
        return int(self.mask.sum())


def chunk_starts(dones, chunk_length: int) -> list[tuple[int, int]]:
    """Split step indices into (start, stop) chunks that never cross an episode end."""
    spans, start = [], 0
    n = len(dones)
    for t in range(n):
        if dones[t] or t == n - 1:
            for s in range(start, t + 1, chunk_length):
                spans.append((s, min(s + chunk_length, t + 1)))
            start = t + 1
    return spans


def make_minibatch(buffer: RolloutBuffer, spans, chunk_length: int) -> Minibatch:
    if buffer.advantages is None:
        raise InvalidArgument("compute_gae must run before building minibatches")
    if not spans:
        raise InvalidArgument("empty minibatch")
    obs_shape = np.shape(buffer.obs[0])
    L, B = chunk_length, len(spans)
    obs = np.zeros((L, B) + obs_shape)
    actions = np.zeros((L, B), dtype=np.int64)
    logp = np.zeros((L, B))
    adv = np.zeros((L, B))
    ret = np.zeros((L, B))
    mask = np.zeros((L, B))
    h0 = np.stack([buffer.hiddens[s] for s, _ in spans])
    for b, (s, e) in enumerate(spans):
        n = e - s
        obs[:n, b] = np.asarray(buffer.obs[s:e])
        actions[:n, b] = buffer.actions[s:e]
        logp[:n, b] = buffer.logp[s:e]
        adv[:n, b] = buffer.advantages[s:e]
        ret[:n, b] = buffer.returns[s:e]
        mask[:n, b] = 1.0
    return Minibatch(obs, h0, actions, logp, adv, ret, mask)


@dataclass
class LossTerms:
    total: Tensor
    policy: float
    value: float
    entropy: float
    ratio: np.ndarray  # per-sample rho, flattened time-major


def ppo_loss_terms(net: PolicyNet, mb: Minibatch, hp) -> LossTerms:
    adv = mb.advantages.reshape(-1)
    mask = mb.mask.reshape(-1)
    if mask.sum() <= 0:
        raise InvalidArgument("minibatch has no valid samples")
    if np.any(np.isnan(adv)):
        raise InvalidArgument("advantages contain NaN")
    if hp.normalize_advantages:
        valid = adv[mask > 0]
        adv = np.where(mask > 0, (adv - valid.mean()) / (valid.std() + 1e-8), 0.0)

    logits, values = net.forward_sequence(mb.obs, mb.h0)
    logp_all = core.log_softmax(logits)
    logp = core.take_last(logp_all, mb.actions.reshape(-1))
    # ratio in log space; exact 1.0 when the policies coincide
    ratio = core.exp(core.sub(logp, Tensor(mb.logp_old.reshape(-1))))
    eps = hp.clip_epsilon
    a = Tensor(adv)
    surr = core.minimum(core.mul(ratio, a), core.mul(core.clip(ratio, 1.0 - eps, 1.0 + eps), a))
    policy = core.neg(core.weighted_mean(surr, mask))
    value = core.weighted_mean(core.square(core.sub(values, Tensor(mb.returns.reshape(-1)))), mask)
    entropy = core.weighted_mean(core.entropy_from_logp(logp_all), mask)
    total = policy + core.mul(value, hp.value_coef) - core.mul(entropy, hp.entropy_coef)
    return LossTerms(total, policy.item(), value.item(), entropy.item(), ratio.data.copy())


def ppo_loss(net: PolicyNet, mb: Minibatch, hp) -> Tensor:
    """Scalar loss: -surrogate + value_coef * value error - entropy_coef * entropy."""
    return ppo_loss_terms(net, mb, hp).total
