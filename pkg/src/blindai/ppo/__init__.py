from .buffer import RolloutBuffer, compute_gae, gae_advantages
from .config import Hyperparams
from .loss import Minibatch, chunk_starts, clipped_surrogate, make_minibatch, ppo_loss, ppo_loss_terms
from .net import PolicyNet, policy_forward
from .rollout import BlindAgent, collect_rollout, play_blind_round, play_blind_selfplay
from .train import OpponentSpec, TrainConfig, TrainResult, load_policy, read_train_log, save_policy, train

__all__ = [
    "RolloutBuffer", "compute_gae", "gae_advantages", "Hyperparams", "Minibatch", "chunk_starts",
    "clipped_surrogate", "make_minibatch", "ppo_loss", "ppo_loss_terms", "PolicyNet", "policy_forward",
    "BlindAgent", "collect_rollout", "play_blind_round", "play_blind_selfplay", "OpponentSpec",
    "TrainConfig", "TrainResult", "load_policy", "read_train_log", "save_policy", "train",
]
