import random
from dataclasses import astuple
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from blindai.arena import ScriptedPolicy, Simulator, default_actions, load_sound_design, reset, write_replay
from blindai.arena.runner import ReplayRecord
from blindai.errors import ConfigError, InvalidArgument
from blindai.evalkit import cli
from blindai.evalkit.compare import compare_designs
from blindai.evalkit.config import RunConfig, load_run_config, parse_run_config
from blindai.evalkit.evaluate import evaluate, round_seeds, self_play
from blindai.evalkit.inspect_audio import read_melspec, render_replay, segment_melspec
from blindai.evalkit.report import (
    EvalReport, RoundRecord, avg_hp_diff, emit_reports, parse_reports, read_reports, win_ratio, write_reports,
)
from blindai.ppo import Hyperparams, OpponentSpec, PolicyNet, load_policy, play_blind_round, save_policy

ACTIONS = default_actions()


def record(diff, frames=100):
    if diff > 0:
        return RoundRecord("self", 400, 400 - diff, frames)
    if diff < 0:
        return RoundRecord("opp", 400 + diff, 400, frames)
    return RoundRecord("draw", 200, 200, frames)


records_st = st.lists(st.integers(-400, 400).map(record), min_size=1, max_size=60)


# -- metrics ------------------------------------------------------------------


def test_win_ratio_57_of_90():
    recs = [record(10)] * 57 + [record(-10)] * 30 + [record(0)] * 3
    assert win_ratio(recs) == Fraction(57, 90)
    assert float(win_ratio(recs)) == pytest.approx(0.6333333333333333, abs=1e-15)


def test_all_draws():
    recs = [record(0)] * 90
    assert win_ratio(recs) == 0 and avg_hp_diff(recs) == 0


def test_metrics_errors():
    with pytest.raises(InvalidArgument):
        win_ratio([])
    with pytest.raises(InvalidArgument):
        RoundRecord("self", 100, 200, 10)


@given(records_st, st.randoms())
def test_metrics_exact_and_order_free(recs, rnd):
    wins = sum(r.hp_self_end > r.hp_opp_end for r in recs)
    assert win_ratio(recs) == Fraction(wins, len(recs))
    assert avg_hp_diff(recs) == Fraction(sum(r.hp_self_end - r.hp_opp_end for r in recs), len(recs))
    shuffled = list(recs)
    rnd.shuffle(shuffled)
    assert win_ratio(shuffled) == win_ratio(recs) and avg_hp_diff(shuffled) == avg_hp_diff(recs)


@given(st.lists(records_st, min_size=1, max_size=4))
def test_report_csv_round_trip(groups):
    reports = [EvalReport("informative", "melspec", i, g) for i, g in enumerate(groups)]
    summary, detail = emit_reports(reports)
    assert summary.splitlines()[0] == "design,encoder,trial,win_ratio,avg_hp_diff"
    assert parse_reports(summary, detail) == reports


def test_parse_rejects_inconsistent_summary():
    rep = EvalReport("sparse", "melspec", 0, [record(5), record(-5)])
    summary, detail = emit_reports([rep])
    with pytest.raises(ConfigError):
        parse_reports(summary.replace("0.5", "0.75"), detail)


def test_write_read_reports(tmp_path):
    rep = EvalReport("sparse", "fftfcn", 1, [record(3), record(0)])
    write_reports(tmp_path, [rep])
    assert (tmp_path / "report.csv").exists() and (tmp_path / "report_rounds.csv").exists()
    assert read_reports(tmp_path) == [rep]


# -- evaluation ---------------------------------------------------------------


@pytest.fixture(scope="module")
def tiny_ckpt(tmp_path_factory):
    path = tmp_path_factory.mktemp("ckpt") / "ckpt-0"
    save_policy(PolicyNet("onedcnn", gru_hidden=8, seed=1), path, round=0)
    return path


def test_evaluate_repeatable(tiny_ckpt, tmp_path):
    a = evaluate(tiny_ckpt, "informative", OpponentSpec(), rounds=3, seed=7)
    b = evaluate(tiny_ckpt, "informative", OpponentSpec(), rounds=3, seed=7)
    assert a == b and a.rounds == 3
    write_reports(tmp_path / "a", [a])
    write_reports(tmp_path / "b", [b])
    assert (tmp_path / "a" / "report.csv").read_bytes() == (tmp_path / "b" / "report.csv").read_bytes()


def test_round_seed_shuffle_invariance(tiny_ckpt):
    """Rounds are independent, so playing them in a different order gives the same multiset."""
    net = load_policy(tiny_ckpt)
    design = load_sound_design("informative")
    seeds = round_seeds(3, 4)
    shuffled = list(seeds)
    random.Random(0).shuffle(shuffled)
    opp = ScriptedPolicy(0.5)
    a = sorted(astuple(RoundRecord.from_result(play_blind_round(net, opp, design, s))) for s in seeds)
    b = sorted(astuple(RoundRecord.from_result(play_blind_round(net, opp, design, s))) for s in shuffled)
    assert a == b


def test_self_play_is_balanced(tiny_ckpt):
    rep = self_play(tiny_ckpt, "informative", pairs=2, seed=1)
    assert rep.rounds == 4 and avg_hp_diff(rep.records) == 0


def test_encoder_mismatch(tiny_ckpt):
    with pytest.raises(ConfigError):
        evaluate(tiny_ckpt, "informative", OpponentSpec(), rounds=1, encoder="melspec")


# -- configuration ------------------------------------------------------------


def test_config_defaults_and_overrides():
    cfg = parse_run_config("[ppo]\ntraining_rounds = 3\nseed = 9\n[eval]\nrounds = 5\ndesigns = informative, sparse\n"
                           "[opponent]\nkind = mcts\nbudget = 10\n[encoder]\nkind = fftfcn\n")
    assert cfg.hp.training_rounds == 3 and cfg.train_seed == 9 and cfg.eval.rounds == 5
    assert cfg.opponent.kind == "mcts" and cfg.encoder.kind.value == "fftfcn"
    assert RunConfig().hp.training_rounds == 150 and RunConfig().eval.rounds == 30
    paper = RunConfig().paper_scale()
    assert paper.hp.training_rounds == 900 and paper.eval.rounds == 90


@pytest.mark.parametrize("text", [
    "[ppo]\nlearning_rate = 1\n",
    "[network]\nx = 1\n",
    "[ppo]\ngamma = two\n",
    "[opponent]\nkind = human\n",
    "[encoder]\nkind = wavenet\n",
])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_run_config(text)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError, match="nope.cfg"):
        load_run_config(tmp_path / "nope.cfg")


# -- comparison grid ----------------------------------------------------------


def tiny_run_config():
    cfg = RunConfig()
    cfg.hp = Hyperparams(training_rounds=1, gru_hidden=8, surrogate_epochs=1, rollout_horizon=60)
    cfg.eval.rounds = 2
    return cfg


def test_identical_configs_give_identical_rows(tmp_path):
    cfg = tiny_run_config()
    table = compare_designs([("informative", "onedcnn"), ("informative", "onedcnn")], cfg, trials=1)
    a, b = table.reports
    assert (a.win_ratio, a.avg_hp_diff) == (b.win_ratio, b.avg_hp_diff)
    table.write(tmp_path)
    assert (tmp_path / "compare.csv").read_text().startswith("design,encoder,trial")
    assert "INCOMPLETE" not in (tmp_path / "compare.txt").read_text()


def test_budget_exhaustion_flags_incomplete():
    table = compare_designs([("informative", "onedcnn"), ("sparse", "onedcnn")], tiny_run_config(),
                            trials=2, budget_seconds=1e-9)
    assert not table.complete and "INCOMPLETE" in table.text()
    with pytest.raises(InvalidArgument):
        compare_designs([("informative", "onedcnn")], tiny_run_config())


# -- audio inspection ---------------------------------------------------------


def fireball_replay(frames=150):
    fb, stand = ACTIONS.id_of("STAND_D_DF_FA"), ACTIONS.id_of("STAND")
    state = reset(0)
    sim = Simulator(state)
    out = []
    for f in range(frames):
        a1 = fb if state.is_free(0) else -1
        a2 = stand if state.is_free(1) else -1
        sim.step(a1, a2)
        out.append(ReplayRecord(f, a1, a2, state.hp(0), state.hp(1)))
    return out


def test_fireball_band_absent_in_sparse():
    recs = fireball_replay()
    inf = segment_melspec(render_replay(recs, "informative"), 40, 100).values
    sparse = segment_melspec(render_replay(recs, "sparse"), 40, 100).values
    gap = inf.mean(axis=1) - sparse.mean(axis=1)
    assert gap.max() > 5.0  # nats of log power, roughly 150x
    assert np.all(sparse >= np.log(1e-6) - 1e-12)


def test_cli_inspect_audio_and_replay(tmp_path):
    path = tmp_path / "fb.csv"
    write_replay(path, fireball_replay())
    assert cli.main(["replay", "--replay", str(path)]) == 0
    for design in ("informative", "sparse"):
        rc = cli.main(["inspect-audio", "--replay", str(path), "--design", design, "--start", "40",
                       "--frames", "100", "--out", str(tmp_path), "--name", f"{design}.csv"])
        assert rc == 0
    head = (tmp_path / "informative.csv").read_text().splitlines()[0].split()
    assert head[:2] == ["melspec-v1", "80"] and head[3:] == ["480", "1200"]
    inf, sparse = read_melspec(tmp_path / "informative.csv"), read_melspec(tmp_path / "sparse.csv")
    assert (inf.values.mean(axis=1) - sparse.values.mean(axis=1)).max() > 5.0


def test_cli_exit_codes(tmp_path, tiny_ckpt, capsys):
    assert cli.main(["evaluate", "--config", str(tmp_path / "missing.cfg")]) == 2
    assert "missing.cfg" in capsys.readouterr().err
    assert cli.main(["frobnicate"]) == 2
    assert cli.main(["train", "--bogus"]) == 2
    cfg = tmp_path / "eval.cfg"
    cfg.write_text("[eval]\nrounds = 2\n[encoder]\nkind = onedcnn\n")
    rc = cli.main(["evaluate", "--config", str(cfg), "--seed", "7", "--checkpoint", str(tiny_ckpt),
                   "--out", str(tmp_path / "ev")])
    assert rc == 0 and (tmp_path / "ev" / "report.csv").exists()
    # runtime failure: tampered replay log
    log = tmp_path / "r.csv"
    write_replay(log, fireball_replay(20))
    text = log.read_text().splitlines()
    text[5] = ",".join(text[5].split(",")[:3] + ["1", "1"])
    log.write_text("\n".join(text) + "\n")
    assert cli.main(["replay", "--replay", str(log)]) == 3


def test_cli_train_smoke(tmp_path):
    cfg = tmp_path / "t.cfg"
    cfg.write_text("[ppo]\ntraining_rounds = 1\ngru_hidden = 8\nsurrogate_epochs = 1\nrollout_horizon = 60\n"
                   "[encoder]\nkind = onedcnn\n")
    assert cli.main(["train", "--config", str(cfg), "--out", str(tmp_path / "run")]) == 0
    assert (tmp_path / "run" / "ckpt-1" / "manifest.txt").exists()
