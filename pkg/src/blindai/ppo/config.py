from __future__ import annotations

from dataclasses import dataclass

from ..errors import ConfigError


@dataclass
class Hyperparams:
    """PPO settings.

    Adam step size, surrogate epochs, minibatch size, gamma, lambda and the
    GRU width follow the published table. ``clip_epsilon`` (0.2), the value
    and entropy coefficients, rollout length and everything below them are
    conventional PPO choices that the table leaves open.
    """

    step_size: float = 3e-4
    surrogate_epochs: int = 10
    minibatch: int = 64
    gamma: float = 0.99
    lam: float = 0.95
    gru_hidden: int = 512
    clip_epsilon: float = 0.2
    value_coef: float = 0.5
    entropy_coef: float = 0.01
    rollout_horizon: int = 3600
    training_rounds: int = 900
    chunk_length: int = 16
    max_grad_norm: float = 0.5
    reward_scale: float = 0.01
    normalize_advantages: bool = True
    checkpoint_every: int = 50

    def __post_init__(self):
        if not (0 < self.gamma <= 1 and 0 < self.lam <= 1):
            raise ConfigError("gamma and lambda must lie in (0, 1]")
        if self.clip_epsilon <= 0:
            raise ConfigError("clip_epsilon must be positive")
        for name in ("surrogate_epochs", "minibatch", "gru_hidden", "chunk_length", "rollout_horizon"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.training_rounds < 0:
            raise ConfigError("training_rounds must be >= 0")
        if self.step_size <= 0 or self.reward_scale <= 0:
            raise ConfigError("step_size and reward_scale must be positive")
