"""Sound-design x encoder comparison grid."""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeout
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import InvalidArgument
from ..ppo.train import train
from ..seeding import derive_seed
from .config import RunConfig
from .evaluate import evaluate
from .report import EvalReport, emit_reports


@dataclass
class ComparisonTable:
    reports: list = field(default_factory=list)  # EvalReport per finished (design, encoder, trial)
    configs: list = field(default_factory=list)
    trials: int = 3
    complete: bool = True

    def rows(self) -> list[dict]:
        """One row per (design, encoder) with per-trial and mean metrics."""
        out = []
        for design, encoder in self.configs:
            reps = [r for r in self.reports if r.design == design and r.encoder == encoder]
            row = {"design": design, "encoder": encoder, "trials_done": len(reps),
                   "win_ratio": [r.win_ratio for r in reps], "avg_hp_diff": [r.avg_hp_diff for r in reps]}
            row["mean_win_ratio"] = float(np.mean(row["win_ratio"])) if reps else float("nan")
            row["mean_avg_hp_diff"] = float(np.mean(row["avg_hp_diff"])) if reps else float("nan")
            out.append(row)
        return out

    def csv(self) -> str:
        return emit_reports(self.reports)[0]

    def text(self) -> str:
        header = f"{'design':<14}{'encoder':<10}{'trials':>7}{'win_ratio':>11}{'avgHP_diff':>12}"
        lines = [header, "-" * len(header)]
        for row in self.rows():
            lines.append(f"{row['design']:<14}{row['encoder']:<10}{row['trials_done']:>7}"
                         f"{row['mean_win_ratio']:>11.3f}{row['mean_avg_hp_diff']:>12.2f}")
        if not self.complete:
            lines.append("INCOMPLETE: budget exhausted before all trials finished")
        return "\n".join(lines) + "\n"

    def write(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        summary, detail = emit_reports(self.reports)
        (out / "compare.csv").write_text(summary)
        (out / "compare_rounds.csv").write_text(detail)
        (out / "compare.txt").write_text(self.text())


def trial_seed(base: int, trial: int) -> int:
    # depends only on the trial index, so identical configs get identical rows
    return derive_seed(base, 0xC0DE, trial)


def run_trial(cfg: RunConfig, design: str, encoder: str, trial: int, out_dir=None) -> EvalReport:
    seed = trial_seed(cfg.train_seed, trial)
    sub = None if out_dir is None else Path(out_dir) / f"{design}-{encoder}-t{trial}"
    result = train(cfg.train_config(out_dir=sub, design=design, encoder=encoder, seed=seed))
    return evaluate(result.net, design, cfg.opponent, rounds=cfg.eval.rounds,
                    seed=derive_seed(cfg.eval.seed, 0xE7A1, trial), greedy=cfg.eval.greedy, trial=trial)


def _run_job(args):
    return run_trial(*args)


def compare_designs(configs, cfg: RunConfig, trials: int = 3, budget_seconds: float = 0.0,
                    out_dir=None, workers: int = 1) -> ComparisonTable:
    """Train and evaluate every (design, encoder) pair ``trials`` times.

    With a positive ``budget_seconds`` no new job starts after the budget is
    spent and the table is marked incomplete. Results are ordered by
    (config, trial) whatever the worker count.
    """
    configs = [tuple(c) for c in configs]
    if len(configs) < 2:
        raise InvalidArgument("compare_designs needs at least two (design, encoder) configurations")
    table = ComparisonTable(configs=configs, trials=trials)
    jobs = [(cfg, d, e, t, out_dir) for d, e in configs for t in range(trials)]
    start = time.monotonic()

    def over_budget():
        return budget_seconds > 0 and time.monotonic() - start >= budget_seconds

    if workers <= 1:
        for job in jobs:
            if over_budget():
                table.complete = False
                break
            table.reports.append(run_trial(*job))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_job, job) for job in jobs]
            for fut in futures:
                remaining = None if budget_seconds <= 0 else max(0.0, budget_seconds - (time.monotonic() - start))
                try:
                    table.reports.append(fut.result(timeout=remaining))
                except FutureTimeout:
                    table.complete = False
                    for f in futures:
                        f.cancel()
                    break
    return table
