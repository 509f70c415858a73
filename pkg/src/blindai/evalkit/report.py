"""Competition metrics and their CSV form."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from ..arena.game import RoundResult, Winner
from ..errors import ConfigError, InvalidArgument

REPORT_FIELDS = ("design", "encoder", "trial", "win_ratio", "avg_hp_diff")
ROUND_FIELDS = ("design", "encoder", "trial", "round", "winner", "hp_self_end", "hp_opp_end", "frames")


@dataclass(frozen=True)
class RoundRecord:
    """One finished round from the evaluated agent's side."""

    winner: str  # "self", "opp" or "draw"
    hp_self_end: int
    hp_opp_end: int
    frames: int

    def __post_init__(self):
        expected = "self" if self.hp_self_end > self.hp_opp_end else "opp" if self.hp_opp_end > self.hp_self_end else "draw"
        if self.winner != expected:
            raise InvalidArgument(f"winner {self.winner!r} inconsistent with HP {self.hp_self_end} vs {self.hp_opp_end}")

    @classmethod
    def from_result(cls, result: RoundResult, me: int = 0) -> "RoundRecord":
        if result.winner == Winner.DRAW:
            w = "draw"
        else:
            w = "self" if (result.winner == Winner.P1) == (me == 0) else "opp"
        return cls(w, result.hp_self_end, result.hp_opp_end, result.frames_played)

    @property
    def hp_diff(self) -> int:
        return self.hp_self_end - self.hp_opp_end


def win_ratio(records) -> Fraction:
    """Winning rounds over total rounds; draws are not wins."""
    records = list(records)
    if not records:
        raise InvalidArgument("no rounds to score")
    return Fraction(sum(r.winner == "self" for r in records), len(records))


def avg_hp_diff(records) -> Fraction:
    records = list(records)
    if not records:
        raise InvalidArgument("no rounds to score")
    return Fraction(sum(r.hp_diff for r in records), len(records))


@dataclass
class EvalReport:
    design: str
    encoder: str
    trial: int = 0
    records: list = field(default_factory=list)

    @property
    def rounds(self) -> int:
        return len(self.records)

    @property
    def wins(self) -> int:
        return sum(r.winner == "self" for r in self.records)

    @property
    def win_ratio(self) -> float:
        return float(win_ratio(self.records))

    @property
    def avg_hp_diff(self) -> float:
        return float(avg_hp_diff(self.records))

    def summary_row(self) -> dict:
        return {"design": self.design, "encoder": self.encoder, "trial": self.trial,
                "win_ratio": repr(self.win_ratio), "avg_hp_diff": repr(self.avg_hp_diff)}

    def round_rows(self) -> list[dict]:
        return [{"design": self.design, "encoder": self.encoder, "trial": self.trial, "round": i,
                 "winner": r.winner, "hp_self_end": r.hp_self_end, "hp_opp_end": r.hp_opp_end,
                 "frames": r.frames} for i, r in enumerate(self.records)]


def _csv_text(fields, rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def emit_reports(reports) -> tuple[str, str]:
    """Return ``(summary_csv, rounds_csv)`` text for a list of reports."""
    summary = _csv_text(REPORT_FIELDS, [r.summary_row() for r in reports])
    detail = _csv_text(ROUND_FIELDS, [row for r in reports for row in r.round_rows()])
    return summary, detail


def parse_reports(summary_csv: str, rounds_csv: str) -> list[EvalReport]:
    """Inverse of :func:`emit_reports`; the summary must agree with the round detail."""
    reports: dict = {}
    order = []
    sreader = csv.DictReader(io.StringIO(summary_csv))
    if tuple(sreader.fieldnames or ()) != REPORT_FIELDS:
        raise ConfigError(f"report csv must have columns {','.join(REPORT_FIELDS)}")
    summaries = list(sreader)
    for row in summaries:
        key = (row["design"], row["encoder"], int(row["trial"]))
        reports[key] = EvalReport(*key)
        order.append(key)
    rreader = csv.DictReader(io.StringIO(rounds_csv))
    if tuple(rreader.fieldnames or ()) != ROUND_FIELDS:
        raise ConfigError(f"round csv must have columns {','.join(ROUND_FIELDS)}")
    for row in rreader:
        key = (row["design"], row["encoder"], int(row["trial"]))
        if key not in reports:
            raise ConfigError(f"round detail for unknown report {key}")
        rep = reports[key]
        if int(row["round"]) != len(rep.records):
            raise ConfigError(f"round detail for {key} out of order")
        rep.records.append(RoundRecord(row["winner"], int(row["hp_self_end"]), int(row["hp_opp_end"]),
                                       int(row["frames"])))
    for row, key in zip(summaries, order):
        rep = reports[key]
        if not rep.records:
            raise ConfigError(f"report {key} has no rounds")
        if float(row["win_ratio"]) != rep.win_ratio or float(row["avg_hp_diff"]) != rep.avg_hp_diff:
            raise ConfigError(f"summary for {key} disagrees with its round detail")
    return [reports[k] for k in order]


def write_reports(out_dir, reports, stem: str = "report") -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary, detail = emit_reports(reports)
    p1, p2 = out / f"{stem}.csv", out / f"{stem}_rounds.csv"
    p1.write_text(summary)
    p2.write_text(detail)
    return p1, p2


def read_reports(out_dir, stem: str = "report") -> list[EvalReport]:
    out = Path(out_dir)
    for p in (out / f"{stem}.csv", out / f"{stem}_rounds.csv"):
        if not p.exists():
            raise ConfigError(f"report file not found: {p}")
    return parse_reports((out / f"{stem}.csv").read_text(), (out / f"{stem}_rounds.csv").read_text())
