from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidArgument


@dataclass
class RolloutBuffer:
    """Per-decision trajectory store.

    ``obs`` holds the encoder's preprocessed input, ``hiddens`` the GRU state
    *before* the step, and ``rewards`` the raw HP-difference reward summed over
    every frame the action was in effect.
    """

    obs: list = field(default_factory=list)
    actions: list = field(default_factory=list)
    rewards: list = field(default_factory=list)
    logp: list = field(default_factory=list)
    values: list = field(default_factory=list)
    dones: list = field(default_factory=list)
    hiddens: list = field(default_factory=list)
    advantages: np.ndarray | None = None
    returns: np.ndarray | None = None

    def add(self, obs, action, logp, value, hidden) -> None:
        self.obs.append(obs)
        self.actions.append(int(action))
        self.rewards.append(0)
        self.logp.append(float(logp))
        self.values.append(float(value))
        self.dones.append(False)
        self.hiddens.append(hidden)

    def __len__(self):
        return len(self.actions)

    def arrays(self) -> dict:
        return {
            "obs": np.asarray(self.obs, dtype=np.float64),
            "actions": np.asarray(self.actions, dtype=np.int64),
            "rewards": np.asarray(self.rewards, dtype=np.float64),
            "logp": np.asarray(self.logp, dtype=np.float64),
            "values": np.asarray(self.values, dtype=np.float64),
            "dones": np.asarray(self.dones, dtype=bool),
            "hiddens": np.asarray(self.hiddens, dtype=np.float64),
        }

    def check(self) -> None:
        n = len(self.actions)
        lens = {len(x) for x in (self.obs, self.rewards, self.logp, self.values, self.dones, self.hiddens)}
        if lens != {n}:
            raise InvalidArgument("rollout buffer arrays have unequal lengths")


def gae_advantages(rewards, values, dones, v_last: float, gamma: float, lam: float):
    """Backward GAE recursion; ``dones[t]`` cuts bootstrapping after step t."""
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=bool)
    n = len(rewards)
    if n == 0:
        raise InvalidArgument("cannot compute advantages of an empty buffer")
    if not (len(values) == len(dones) == n):
        raise InvalidArgument("rewards, values and dones must have equal length")
    adv = np.zeros(n)
    next_value, next_adv = float(v_last), 0.0
    for t in range(n - 1, -1, -1):
        live = 0.0 if dones[t] else 1.0
        delta = rewards[t] + gamma * next_value * live - values[t]
        next_adv = delta + gamma * lam * live * next_adv
        adv[t] = next_adv
        next_value = values[t]
    return adv, adv + values


def compute_gae(buffer: RolloutBuffer, v_last: float, hp, reward_scale: float = 1.0):
    """Fill ``buffer.advantages``/``buffer.returns``; ``v_last`` is 0 after a terminal step."""
    if len(buffer) == 0:
        raise InvalidArgument("cannot compute advantages of an empty buffer")
    rewards = np.asarray(buffer.rewards, dtype=np.float64) * reward_scale
    adv, ret = gae_advantages(rewards, buffer.values, buffer.dones, v_last, hp.gamma, hp.lam)
    buffer.advantages, buffer.returns = adv, ret
    return adv, ret
