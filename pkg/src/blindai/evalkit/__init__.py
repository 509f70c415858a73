from .compare import ComparisonTable, compare_designs
from .config import RunConfig, load_run_config, parse_run_config
from .evaluate import evaluate, evaluate_policy, round_seeds, self_play
from .report import EvalReport, RoundRecord, avg_hp_diff, emit_reports, parse_reports, win_ratio

__all__ = [
    "ComparisonTable", "compare_designs", "RunConfig", "load_run_config", "parse_run_config",
    "evaluate", "evaluate_policy", "round_seeds", "self_play", "EvalReport", "RoundRecord",
    "avg_hp_diff", "emit_reports", "parse_reports", "win_ratio",
]
