from __future__ import annotations

from pathlib import Path

from ..arena.actions import ActionTable
from ..arena.opponents import Policy
from ..arena.runner import play_round
from ..arena.sound import SoundDesign, load_sound_design
from ..encoders import EncoderConfig
from ..errors import ConfigError
from ..ppo.net import PolicyNet
from ..ppo.rollout import play_blind_round, play_blind_selfplay
from ..ppo.train import OpponentSpec, load_policy
from ..seeding import derive_seed
from .report import EvalReport, RoundRecord


def _policy(checkpoint, encoder) -> PolicyNet:
    if isinstance(checkpoint, PolicyNet):
        if encoder is not None:
            kind = encoder.kind if isinstance(encoder, EncoderConfig) else EncoderConfig(kind=encoder).kind
            if kind != checkpoint.kind:
                raise ConfigError(f"policy uses {checkpoint.kind.value}, configured encoder is {kind.value}")
        return checkpoint
    return load_policy(Path(checkpoint), encoder)


def round_seeds(seed: int, rounds: int) -> list[int]:
    """Per-round seeds, each derivable on its own from (seed, index)."""
    return [derive_seed(seed, 0xE7A1, i) for i in range(rounds)]


def evaluate(checkpoint, design: SoundDesign | str, opponent: OpponentSpec | Policy,
             rounds: int = 90, seed: int = 0, encoder=None, greedy: bool = True,
             trial: int = 0, actions: ActionTable | None = None) -> EvalReport:
    """Play ``rounds`` independent rounds of the blind policy against ``opponent``.

    ``checkpoint`` is a checkpoint directory or an in-memory PolicyNet.
    """
    net = _policy(checkpoint, encoder)
    design = design if isinstance(design, SoundDesign) else load_sound_design(design)
    opp = opponent.build() if isinstance(opponent, OpponentSpec) else opponent
    report = EvalReport(design.name, net.kind.value, trial)
    for s in round_seeds(seed, rounds):
        result = play_blind_round(net, opp, design, s, greedy=greedy, actions=actions)
        report.records.append(RoundRecord.from_result(result))
    return report


def evaluate_policy(policy: Policy, design_name: str, opponent: OpponentSpec | Policy,
                    rounds: int = 90, seed: int = 0, label: str = "baseline",
                    actions: ActionTable | None = None) -> EvalReport:
    """Same protocol for a full-information policy as player 1 (e.g. a uniform baseline)."""
    opp = opponent.build() if isinstance(opponent, OpponentSpec) else opponent
    report = EvalReport(design_name, label, 0)
    for s in round_seeds(seed, rounds):
        policy.reset(derive_seed(s, 1))
        opp.reset(derive_seed(s, 2))
        result, _ = play_round(policy, opp, s, actions=actions)
        report.records.append(RoundRecord.from_result(result))
    return report


def self_play(checkpoint, design: SoundDesign | str, pairs: int = 45, seed: int = 0,
              encoder=None) -> EvalReport:
    """The policy against itself over seed-paired rounds, the second of each pair side-swapped."""
    net = _policy(checkpoint, encoder)
    design = design if isinstance(design, SoundDesign) else load_sound_design(design)
    report = EvalReport(design.name, net.kind.value, 0)
    for s in round_seeds(seed, pairs):
        for mirrored in (False, True):
            result = play_blind_selfplay(net, net, design, s, mirrored=mirrored)
            report.records.append(RoundRecord.from_result(result))
    return report
