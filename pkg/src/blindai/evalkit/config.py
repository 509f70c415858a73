"""INI run configuration.

Sections ``encoder``, ``ppo``, ``arena``, ``design``, ``opponent`` and
``eval``; every key has a default and unknown sections or keys are errors.
The defaults are the smoke profile (150 training rounds, 30 evaluation
rounds); :meth:`RunConfig.paper_scale` switches to 900/90.
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from ..encoders import EncoderConfig, EncoderKind
from ..errors import ConfigError
from ..ppo.config import Hyperparams
from ..ppo.train import OpponentSpec, TrainConfig

SMOKE_TRAIN_ROUNDS = 150
SMOKE_EVAL_ROUNDS = 30
PAPER_TRAIN_ROUNDS = 900
PAPER_EVAL_ROUNDS = 90


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


@dataclass
class EvalSettings:
    rounds: int = SMOKE_EVAL_ROUNDS
    seed: int = 0
    greedy: bool = True
    trials: int = 3
    checkpoint: str = ""
    designs: list = field(default_factory=lambda: ["informative", "sparse"])
    encoders: list = field(default_factory=lambda: ["melspec"])
    budget_seconds: float = 0.0  # 0 = unlimited
    workers: int = 1


@dataclass
class RunConfig:
    encoder: EncoderConfig = field(default_factory=lambda: EncoderConfig(kind=EncoderKind.MELSPEC))
    hp: Hyperparams = field(default_factory=lambda: Hyperparams(training_rounds=SMOKE_TRAIN_ROUNDS))
    train_seed: int = 0
    mirrored: bool = False
    design: str = "informative"
    opponent: OpponentSpec = field(default_factory=OpponentSpec)
    eval: EvalSettings = field(default_factory=EvalSettings)

    def paper_scale(self) -> "RunConfig":
        self.hp = dataclasses.replace(self.hp, training_rounds=PAPER_TRAIN_ROUNDS)
        self.eval.rounds = PAPER_EVAL_ROUNDS
        return self

    def with_seed(self, seed: int) -> "RunConfig":
        self.train_seed = seed
        self.eval.seed = seed
        return self

    def train_config(self, out_dir=None, design: str | None = None, encoder: str | None = None,
                     seed: int | None = None) -> TrainConfig:
        enc = self.encoder if encoder is None else EncoderConfig(kind=encoder)
        return TrainConfig(encoder=enc, design=design or self.design, opponent=self.opponent,
                           hp=self.hp, seed=self.train_seed if seed is None else seed, out_dir=out_dir)


_HP_FIELDS = {f.name: f.type for f in dataclasses.fields(Hyperparams)}
_SECTIONS = ("encoder", "ppo", "arena", "design", "opponent", "eval")


def _convert(kind, text: str, where: str):
    try:
        if kind in ("int", int):
            return int(text)
        if kind in ("float", float):
            return float(text)
        if kind in ("bool", bool):
            return _bool(text)
        return text.strip()
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _ints(text: str, where: str) -> tuple:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"{where}: expected comma-separated integers, got {text!r}") from None


def _encoder_section(cp, source) -> EncoderConfig:
    """``kind``, ``downsample`` and ``<layer>.<channels|kernel|stride|padding>`` overrides."""
    sec = dict(cp["encoder"])
    kind = sec.pop("kind", "melspec").strip()
    downsample = _convert(int, sec.pop("downsample", "0"), f"{source}:[encoder] downsample")
    defaults = EncoderConfig(kind=kind).layers
    layers = {name: dataclasses.replace(conf) for name, conf in defaults.items()}
    for key, val in sec.items():
        name, _, attr = key.partition(".")
        where = f"{source}:[encoder] {key}"
        if name not in layers or attr not in ("channels", "kernel", "stride", "padding"):
            raise ConfigError(f"{where}: unknown encoder key")
        if attr == "channels":
            layers[name].channels = _convert(int, val, where)
        else:
            setattr(layers[name], attr, _ints(val, where))
    return EncoderConfig(kind=kind, layers=layers, downsample=downsample)


def parse_run_config(text: str, source: str = "<string>") -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    unknown = [s for s in cp.sections() if s not in _SECTIONS]
    if unknown:
        raise ConfigError(f"{source}: unknown sections {unknown}; expected {list(_SECTIONS)}")
    cfg = RunConfig()

    def section(name, allowed):
        if name not in cp:
            return {}
        sec = dict(cp[name])
        bad = sorted(set(sec) - set(allowed))
        if bad:
            raise ConfigError(f"{source}: unknown keys in [{name}]: {bad}")
        return {k: _convert(allowed[k], v, f"{source}:[{name}] {k}") for k, v in sec.items()}

    cfg.encoder = _encoder_section(cp, source) if "encoder" in cp else cfg.encoder

    ppo = section("ppo", {**_HP_FIELDS, "seed": int})
    cfg.train_seed = ppo.pop("seed", cfg.train_seed)
    if ppo:
        cfg.hp = dataclasses.replace(cfg.hp, **ppo)

    arena = section("arena", {"mirrored": bool})
    cfg.mirrored = arena.get("mirrored", cfg.mirrored)

    design = section("design", {"name": str})
    cfg.design = design.get("name", cfg.design)

    opp = section("opponent", {"kind": str, "skill": float, "budget": int})
    if opp:
        cfg.opponent = OpponentSpec(**{**dataclasses.asdict(cfg.opponent), **opp})
    if cfg.opponent.kind not in ("scripted", "mcts", "random"):
        raise ConfigError(f"{source}: unknown opponent kind {cfg.opponent.kind!r}")
    if not 0.0 <= cfg.opponent.skill <= 1.0:
        raise ConfigError(f"{source}: opponent skill must be in [0, 1]")

    ev = section("eval", {"rounds": int, "seed": int, "greedy": bool, "trials": int, "checkpoint": str,
                          "designs": str, "encoders": str, "budget_seconds": float, "workers": int})
    for key in ("designs", "encoders"):
        if key in ev:
            ev[key] = _list(ev[key])
    cfg.eval = dataclasses.replace(cfg.eval, **ev)
    if cfg.eval.rounds < 1 or cfg.eval.trials < 1 or cfg.eval.workers < 1:
        raise ConfigError(f"{source}: eval rounds, trials and workers must be >= 1")
    for kind in cfg.eval.encoders:
        EncoderConfig(kind=kind)
    return cfg


def load_run_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    cfg = parse_run_config(path.read_text(), str(path))
    base = path.parent
    if cfg.eval.checkpoint and not Path(cfg.eval.checkpoint).is_absolute():
        cfg.eval.checkpoint = str(base / cfg.eval.checkpoint)
    return cfg
