"""``blindai`` command line: train, evaluate, compare, inspect-audio, replay.

Exit codes: 0 success, 2 configuration or usage error, 3 runtime failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..arena.opponents import make_opponent
from ..arena.runner import play_round, read_replay, verify_replay, write_replay
from ..errors import BlindAIError, ConfigError
from ..ppo.train import train
from .compare import compare_designs
from .config import RunConfig, load_run_config
from .evaluate import evaluate
from .inspect_audio import render_replay, segment_melspec, write_melspec
from .report import write_reports

log = logging.getLogger("blindai")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _common(p):
    p.add_argument("--config", help="run configuration file (INI)")
    p.add_argument("--seed", type=int, help="overrides the configured seeds")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.add_argument("--paper-scale", action="store_true", help="900 training / 90 evaluation rounds")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="blindai", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train a blind agent")
    _common(p)

    p = sub.add_parser("evaluate", help="evaluate a checkpoint; writes report.csv")
    _common(p)
    p.add_argument("--checkpoint", help="checkpoint directory (else [eval] checkpoint)")

    p = sub.add_parser("compare", help="design x encoder grid; writes compare.csv/.txt")
    _common(p)
    p.add_argument("--workers", type=int, help="parallel training processes")

    p = sub.add_parser("inspect-audio", help="dump the mel spectrogram of a replay segment")
    _common(p)
    p.add_argument("--replay", required=True, help="replay log (csv)")
    p.add_argument("--design", help="sound design name or file (else [design] name)")
    p.add_argument("--listener", type=int, default=0, choices=(0, 1))
    p.add_argument("--start", type=int, default=0, help="first frame of the segment")
    p.add_argument("--frames", type=int, default=60, help="segment length in frames")
    p.add_argument("--mirrored", action="store_true")
    p.add_argument("--name", default="melspec.csv")

    p = sub.add_parser("replay", help="verify a replay log, or record a new one with --record")
    _common(p)
    p.add_argument("--replay", required=True, help="replay log (csv)")
    p.add_argument("--mirrored", action="store_true")
    p.add_argument("--record", action="store_true", help="play a round and write the log instead")
    p.add_argument("--p1", default="scripted", help="player 1 kind when recording")
    p.add_argument("--p2", default="scripted", help="player 2 kind when recording")
    p.add_argument("--skill", type=float, default=1.0)
    return parser


def _config(args) -> RunConfig:
    cfg = load_run_config(args.config) if args.config else RunConfig()
    if args.paper_scale:
        cfg.paper_scale()
    if args.seed is not None:
        cfg.with_seed(args.seed)
    return cfg


def cmd_train(args, cfg: RunConfig) -> int:
    out = Path(args.out)

    def progress(row):
        log.info("round %d steps %d reward %d win %d", row["round"], row["steps"], row["reward_sum"], row["win"])

    result = train(cfg.train_config(out_dir=out), progress)
    print(f"trained {len(result.log_rows)} rounds; checkpoints in {out}")
    return EXIT_OK


def cmd_evaluate(args, cfg: RunConfig) -> int:
    ckpt = args.checkpoint or cfg.eval.checkpoint
    if not ckpt:
        raise ConfigError("no checkpoint given (use --checkpoint or [eval] checkpoint)")
    if not (Path(ckpt) / "manifest.txt").exists():
        raise ConfigError(f"checkpoint not found: {ckpt}")
    report = evaluate(ckpt, cfg.design, cfg.opponent, rounds=cfg.eval.rounds, seed=cfg.eval.seed,
                      encoder=cfg.encoder, greedy=cfg.eval.greedy)
    path, _ = write_reports(args.out, [report])
    print(f"win_ratio={report.win_ratio:.4f} avg_hp_diff={report.avg_hp_diff:.2f} -> {path}")
    return EXIT_OK


def cmd_compare(args, cfg: RunConfig) -> int:
    grid = [(d, e) for e in cfg.eval.encoders for d in cfg.eval.designs]
    table = compare_designs(grid, cfg, trials=cfg.eval.trials, budget_seconds=cfg.eval.budget_seconds,
                            out_dir=args.out, workers=args.workers or cfg.eval.workers)
    table.write(args.out)
    print(table.text(), end="")
    return EXIT_OK


def cmd_inspect(args, cfg: RunConfig) -> int:
    records = read_replay(args.replay)
    seed = args.seed if args.seed is not None else 0
    audio = render_replay(records, args.design or cfg.design, args.listener, seed, args.mirrored)
    spec = segment_melspec(audio, args.start, args.frames)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = write_melspec(out / args.name, spec)
    print(f"{spec.values.shape[0]}x{spec.values.shape[1]} mel spectrogram -> {path}")
    return EXIT_OK


def cmd_replay(args, cfg: RunConfig) -> int:
    seed = args.seed if args.seed is not None else 0
    if args.record:
        p1 = make_opponent(args.p1, args.skill, cfg.opponent.budget, seed)
        p2 = make_opponent(args.p2, args.skill, cfg.opponent.budget, seed + 1)
        result, records = play_round(p1, p2, seed, args.mirrored, record=True)
        Path(args.replay).parent.mkdir(parents=True, exist_ok=True)
        write_replay(args.replay, records)
        print(f"recorded {len(records)} frames, winner {result.winner.value} -> {args.replay}")
        return EXIT_OK
    records = read_replay(args.replay)
    if verify_replay(records, seed, args.mirrored):
        print(f"replay verified: {len(records)} frames bit-identical")
        return EXIT_OK
    print("replay diverged from the logged trajectory", file=sys.stderr)
    return EXIT_RUNTIME


COMMANDS = {"train": cmd_train, "evaluate": cmd_evaluate, "compare": cmd_compare,
            "inspect-audio": cmd_inspect, "replay": cmd_replay}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        cfg = _config(args)
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BlindAIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except Exception as exc:  # noqa: BLE001
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def cli(argv=None) -> int:
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
