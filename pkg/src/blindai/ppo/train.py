from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..arena.opponents import make_opponent
from ..arena.sound import SoundDesign, load_sound_design
from ..encoders import EncoderConfig
from ..errors import ConfigError, StateError
from ..seeding import derive_rng, derive_seed
from ..tensor import checkpoint
from ..tensor.core import backward
from ..tensor.optim import AdamState, adam_step, clip_grad_norm
from .buffer import compute_gae
from .config import Hyperparams
from .loss import chunk_starts, make_minibatch, ppo_loss_terms
from .net import PolicyNet
from .rollout import collect_rollout

log = logging.getLogger(__name__)

LOG_FIELDS = ("round", "steps", "reward_sum", "win", "policy_loss", "value_loss", "entropy")


@dataclass
class OpponentSpec:
    kind: str = "scripted"
    skill: float = 0.5
    budget: int = 2000

    def build(self, seed: int = 0):
        return make_opponent(self.kind, self.skill, self.budget, seed)


@dataclass
class TrainConfig:
    encoder: EncoderConfig | str = "melspec"
    design: str = "informative"
    opponent: OpponentSpec = field(default_factory=OpponentSpec)
    hp: Hyperparams = field(default_factory=Hyperparams)
    seed: int = 0
    out_dir: str | Path | None = None


@dataclass
class TrainResult:
    net: PolicyNet
    log_rows: list
    checkpoints: list


def checkpoint_name(round_index: int) -> str:
    return f"ckpt-{round_index}"


def save_policy(net: PolicyNet, directory, **meta) -> Path:
    meta = {"encoder": net.kind.value, "gru_hidden": net.gru_hidden, **meta}
    return checkpoint.save_checkpoint(directory, net.named_parameters(), meta)


def load_policy(directory, encoder: EncoderConfig | str | None = None) -> PolicyNet:
    """Rebuild a PolicyNet from a checkpoint; ``encoder`` must agree with the manifest if given."""
    meta, _ = checkpoint.read_manifest(directory)
    kind = meta.get("encoder")
    if encoder is not None:
        cfg = encoder if isinstance(encoder, EncoderConfig) else EncoderConfig(kind=encoder)
        if cfg.kind.value != kind:
            raise ConfigError(f"checkpoint {directory} holds a {kind} policy, configured encoder is {cfg.kind.value}")
    else:
        cfg = kind
    net = PolicyNet(cfg, gru_hidden=int(meta.get("gru_hidden", 512)))
    checkpoint.load_checkpoint(directory, net.named_parameters())
    return net


def update(net: PolicyNet, buffer, adam: AdamState, hp: Hyperparams, rng) -> dict:
    """Surrogate epochs over shuffled minibatches of sequence chunks."""
    spans = chunk_starts(buffer.dones, hp.chunk_length)
    params = net.parameters()
    stats = {"policy_loss": 0.0, "value_loss": 0.0, "entropy": 0.0}
    n_updates = 0
    for _ in range(hp.surrogate_epochs):
        order = rng.permutation(len(spans))
        for lo in range(0, len(order), hp.minibatch):
            mb = make_minibatch(buffer, [spans[i] for i in order[lo : lo + hp.minibatch]], hp.chunk_length)
            terms = ppo_loss_terms(net, mb, hp)
            if not np.isfinite(terms.total.item()):
                raise FloatingPointError(f"non-finite loss {terms.total.item()}")
            backward(terms.total, params)
            clip_grad_norm(params, hp.max_grad_norm)
            adam_step(params, adam)
            stats["policy_loss"] += terms.policy
            stats["value_loss"] += terms.value
            stats["entropy"] += terms.entropy
            n_updates += 1
    return {k: v / max(n_updates, 1) for k, v in stats.items()}


def train(config: TrainConfig, progress=None) -> TrainResult:
    """Train one blind agent against the configured opponent.

    Writes ``ckpt-0`` before any update, then ``ckpt-<round>`` every
    ``checkpoint_every`` rounds and after the last round, and ``train_log.csv``.
    A non-finite loss saves ``ckpt-<round>-diverged`` and raises StateError.
    """
    hp = config.hp
    design = config.design if isinstance(config.design, SoundDesign) else load_sound_design(config.design)
    net = PolicyNet(config.encoder, gru_hidden=hp.gru_hidden, seed=derive_seed(config.seed, 0))
    opponent = config.opponent.build()
    adam = AdamState(step_size=hp.step_size)
    update_rng = derive_rng(config.seed, 3)
    out = Path(config.out_dir) if config.out_dir is not None else None
    rows, ckpts = [], []

    def snapshot(name, round_index):
        if out is not None:
            ckpts.append(save_policy(net, out / name, round=round_index, seed=config.seed,
                                     design=design.name))

    snapshot(checkpoint_name(0), 0)
    writer = None
    fh = None
    if out is not None:
        fh = open(out / "train_log.csv", "w", newline="")
        writer = csv.writer(fh)
        writer.writerow(LOG_FIELDS)
    try:
        for r in range(1, hp.training_rounds + 1):
            buf, result, v_last = collect_rollout(net, opponent, design, hp, derive_seed(config.seed, 1, r))
            compute_gae(buf, v_last, hp, hp.reward_scale)
            try:
                stats = update(net, buf, adam, hp, update_rng)
            except FloatingPointError as exc:
                snapshot(f"{checkpoint_name(r)}-diverged", r)
                raise StateError(f"training diverged at round {r}: {exc}") from None
            row = {
                "round": r,
                "steps": len(buf),
                "reward_sum": int(np.sum(buf.rewards)),
                "win": int(result.hp_self_end > result.hp_opp_end),
                **stats,
            }
            rows.append(row)
            if writer is not None:
                writer.writerow([row[k] for k in LOG_FIELDS])
                fh.flush()
            if progress is not None:
                progress(row)
            log.debug("round %d reward %d", r, row["reward_sum"])
            if r % hp.checkpoint_every == 0 or r == hp.training_rounds:
                snapshot(checkpoint_name(r), r)
    finally:
        if fh is not None:
            fh.close()
    return TrainResult(net, rows, ckpts)


def read_train_log(path) -> list[dict]:
    with open(path, newline="") as fh:
        return [
            {k: (float(v) if k in ("policy_loss", "value_loss", "entropy") else int(v)) for k, v in row.items()}
            for row in csv.DictReader(fh)
        ]
