import importlib
import itertools
from fractions import Fraction

import numpy as np
import pytest
from gradcheck import finite_difference_check
from hypothesis import given, settings
from hypothesis import strategies as st

from blindai.arena import ScriptedPolicy, load_sound_design
from blindai.encoders import AudioFeature, EncoderKind
from blindai.errors import ConfigError, InvalidArgument, ShapeError, StateError
from blindai.ppo import (
    Hyperparams, Minibatch, PolicyNet, RolloutBuffer, TrainConfig, chunk_starts, clipped_surrogate,
    collect_rollout, compute_gae, gae_advantages, load_policy, make_minibatch, ppo_loss_terms,
    policy_forward, read_train_log, train,
)
from blindai.seeding import derive_seed
from blindai.tensor import Tensor, backward, core, no_grad

SMALL = dict(gru_hidden=8, rollout_horizon=120, surrogate_epochs=1, minibatch=4, chunk_length=4)


def small_hp(**kw):
    return Hyperparams(**{**SMALL, **kw})


# -- GAE ----------------------------------------------------------------------


def explicit_gae(rewards, values, dones, v_last, gamma, lam):
    """Double loop over the TD-residual sum, stopping at episode ends."""
    n = len(rewards)
    nxt = np.append(values[1:], v_last)
    live = 1.0 - np.asarray(dones, dtype=float)
    delta = rewards + gamma * nxt * live - values
    adv = np.zeros(n)
    for t in range(n):
        coef = 1.0
        for k in range(t, n):
            adv[t] += coef * delta[k]
            if dones[k]:
                break
            coef *= gamma * lam
    return adv


def test_gae_hand_case():
    adv, ret = gae_advantages([1.0, 0.0], [0.5, 1.0], [False, True], 0.0, 0.99, 0.95)
    exact = Fraction("1.49") + Fraction("0.9405") * Fraction(-1)
    assert exact == Fraction("0.5495")
    assert adv[0] == pytest.approx(0.5495, abs=1e-15)
    assert adv[1] == -1.0
    np.testing.assert_array_equal(ret, adv + np.array([0.5, 1.0]))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 200), st.integers(0, 2**32 - 1), st.floats(0.5, 1.0), st.floats(0.01, 1.0))
def test_gae_matches_explicit_sum(n, seed, gamma, lam):
    rng = np.random.default_rng(seed)
    r, v = rng.normal(size=n), rng.normal(size=n)
    d = rng.random(n) < 0.1
    v_last = float(rng.normal())
    adv, _ = gae_advantages(r, v, d, v_last, gamma, lam)
    np.testing.assert_allclose(adv, explicit_gae(r, v, d, v_last, gamma, lam), rtol=0, atol=1e-10)


def test_gae_lambda_zero_is_td_residual():
    rng = np.random.default_rng(0)
    r, v = rng.normal(size=20), rng.normal(size=20)
    d = np.zeros(20, bool)
    d[9] = True
    adv, _ = gae_advantages(r, v, d, 0.3, 0.99, 0.0)
    nxt = np.append(v[1:], 0.3) * (1 - d)
    np.testing.assert_array_equal(adv, r + 0.99 * nxt - v)


def test_gae_errors():
    with pytest.raises(InvalidArgument):
        gae_advantages([], [], [], 0.0, 0.99, 0.95)
    with pytest.raises(InvalidArgument):
        compute_gae(RolloutBuffer(), 0.0, Hyperparams())
    with pytest.raises(ConfigError):
        Hyperparams(lam=0.0)


# -- surrogate ----------------------------------------------------------------


def test_clip_examples():
    assert clipped_surrogate(1.5, 1.0, 0.2) == pytest.approx(1.2)
    assert clipped_surrogate(0.5, -1.0, 0.2) == pytest.approx(-0.8)


def test_clip_table_brute_force():
    eps = 0.2
    for rho, a in itertools.product(np.linspace(0, 2, 41), np.linspace(-2, 2, 21)):
        clipped = min(max(rho, 1 - eps), 1 + eps)
        expect = min(rho * a, clipped * a)
        assert clipped_surrogate(rho, a, eps) == pytest.approx(expect, abs=1e-15)


def rollout_batch(kind="onedcnn", seed=0, n_chunks=3, gru_hidden=8):
    hp = small_hp(gru_hidden=gru_hidden)
    net = PolicyNet(kind, gru_hidden=gru_hidden, seed=seed)
    buf, _, v_last = collect_rollout(net, ScriptedPolicy(0.5), load_sound_design("informative"), hp, seed)
    compute_gae(buf, v_last, hp, hp.reward_scale)
    spans = chunk_starts(buf.dones, hp.chunk_length)[:n_chunks]
    return net, buf, make_minibatch(buf, spans, hp.chunk_length), hp


def current_logp(net, mb):
    with no_grad():
        logits, _ = net.forward_sequence(mb.obs, mb.h0)
    lp = core.log_softmax(logits).data
    return lp[np.arange(len(lp)), mb.actions.reshape(-1)].reshape(mb.actions.shape)


def test_equal_policies_give_unit_ratio():
    net, buf, mb, hp = rollout_batch()
    mb.logp_old = current_logp(net, mb)
    hp = small_hp(normalize_advantages=False)
    terms = ppo_loss_terms(net, mb, hp)
    assert np.all(terms.ratio == 1.0)
    adv, mask = mb.advantages.reshape(-1), mb.mask.reshape(-1)
    assert terms.policy == -((adv * mask).sum() / mask.sum())


def _single_sample_terms(ratio_target, adv):
    net, buf, mb, _ = rollout_batch(n_chunks=1)
    mb.mask[:] = 0
    mb.mask[0, 0] = 1
    mb.advantages[:] = adv
    mb.logp_old = current_logp(net, mb) - np.log(ratio_target)
    hp = small_hp(normalize_advantages=False, value_coef=0.0, entropy_coef=0.0)
    return net, mb, hp


@pytest.mark.parametrize("rho,adv", [(1.5, 1.0), (0.5, -1.0)])
def test_binding_clip_has_zero_gradient(rho, adv):
    net, mb, hp = _single_sample_terms(rho, adv)
    params = net.parameters()
    loss_fn = lambda: ppo_loss_terms(net, mb, hp).total
    backward(loss_fn(), params)
    assert all(np.all(p.grad == 0) for p in params)
    # finite differences agree: the loss is flat around the current parameters
    assert finite_difference_check(loss_fn, params, max_entries=4) <= 1.0


def test_unclipped_sample_has_gradient():
    net, mb, hp = _single_sample_terms(1.05, 1.0)
    params = net.parameters()
    backward(ppo_loss_terms(net, mb, hp).total, params)
    assert any(np.any(p.grad != 0) for p in params)


@pytest.mark.parametrize("kind", list(EncoderKind))
def test_ppo_loss_gradient(kind):
    net, buf, mb, hp = rollout_batch(kind, n_chunks=2, gru_hidden=6)
    # zero-initialised biases put silent-frame activations exactly on the ReLU kink
    rng = np.random.default_rng(2)
    for name, p in net.named_parameters().items():
        if "bias" in name:
            p.data += 0.05 * rng.standard_normal(p.shape)
    # perturb the old policy so ratios are off 1 but inside the clip range
    mb.logp_old = current_logp(net, mb) + np.random.default_rng(1).uniform(-0.1, 0.1, mb.logp_old.shape)
    check = finite_difference_check(lambda: ppo_loss_terms(net, mb, hp).total, net.parameters(), max_entries=4)
    assert check <= 1.0


def test_loss_errors():
    net, buf, mb, hp = rollout_batch(n_chunks=1)
    bad = Minibatch(mb.obs, mb.h0, mb.actions, mb.logp_old, mb.advantages.copy(), mb.returns, mb.mask)
    bad.advantages[0, 0] = np.nan
    with pytest.raises(InvalidArgument):
        ppo_loss_terms(net, bad, hp)
    empty = Minibatch(mb.obs, mb.h0, mb.actions, mb.logp_old, mb.advantages, mb.returns, mb.mask * 0)
    with pytest.raises(InvalidArgument):
        ppo_loss_terms(net, empty, hp)


def test_chunks_never_cross_done():
    d = np.zeros(23, bool)
    d[[6, 22]] = True
    spans = chunk_starts(d, 4)
    assert spans == [(0, 4), (4, 7), (7, 11), (11, 15), (15, 19), (19, 23)]


# -- network ------------------------------------------------------------------


def test_zero_weights_uniform_policy():
    net = PolicyNet("fftfcn", gru_hidden=8)
    for p in net.parameters():
        p.data[:] = 0.0
    feat = AudioFeature(EncoderKind.FFTFCN, Tensor(np.random.default_rng(0).normal(size=256)))
    probs, value, h = policy_forward(net, feat, Tensor(net.initial_hidden()))
    np.testing.assert_allclose(probs.data, 0.025, atol=1e-15)
    assert value.item() == 0.0 and h.shape == (8,)


@pytest.mark.parametrize("kind", list(EncoderKind))
def test_policy_forward_distribution_and_determinism(kind):
    a, b = PolicyNet(kind, gru_hidden=16, seed=3), PolicyNet(kind, gru_hidden=16, seed=3)
    shape = a.encoder.out_shape
    feat = AudioFeature(kind, Tensor(np.random.default_rng(1).normal(size=shape)))
    pa, va, ha = policy_forward(a, feat, Tensor(a.initial_hidden()))
    pb, vb, hb = policy_forward(b, feat, Tensor(b.initial_hidden()))
    assert abs(pa.data.sum() - 1) < 1e-9
    np.testing.assert_array_equal(pa.data, pb.data)
    assert va.item() == vb.item()


def test_policy_forward_kind_mismatch():
    net = PolicyNet("melspec", gru_hidden=8)
    feat = AudioFeature(EncoderKind.FFTFCN, Tensor(np.zeros(256)))
    with pytest.raises(ShapeError):
        policy_forward(net, feat, Tensor(net.initial_hidden()))


# -- rollouts -----------------------------------------------------------------


@pytest.mark.parametrize("seed", range(3))
def test_rollout_reward_telescopes(seed):
    hp = Hyperparams(gru_hidden=8)
    net = PolicyNet("onedcnn", gru_hidden=8, seed=seed)
    buf, res, v_last = collect_rollout(net, ScriptedPolicy(0.5), load_sound_design("informative"), hp, seed)
    assert sum(buf.rewards) == (res.hp_self_end - 400) - (res.hp_opp_end - 400)
    assert buf.dones[-1] and not any(buf.dones[:-1]) and v_last == 0.0
    assert all(isinstance(r, int) for r in buf.rewards)


def test_truncated_rollout_bootstraps():
    hp = small_hp(rollout_horizon=50)
    net = PolicyNet("onedcnn", gru_hidden=8)
    buf, res, v_last = collect_rollout(net, ScriptedPolicy(0.5), load_sound_design("informative"), hp, 0)
    assert res.frames_played == 50 and not any(buf.dones) and v_last != 0.0


def test_silent_design_gives_zero_observations():
    hp = small_hp(rollout_horizon=300)
    net = PolicyNet("onedcnn", gru_hidden=8)
    heard = []
    collect_rollout(net, ScriptedPolicy(1.0), load_sound_design("silent"), hp, 0, audio_log=heard)
    assert heard and all(np.all(f == 0) for f in heard)


def test_rollout_deterministic():
    def run():
        hp = small_hp(rollout_horizon=400)
        net = PolicyNet("melspec", gru_hidden=8, seed=2)
        buf, res, _ = collect_rollout(net, ScriptedPolicy(0.5), load_sound_design("informative"), hp, 5)
        return buf.arrays(), res

    (a, ra), (b, rb) = run(), run()
    assert ra == rb
    for k in a:
        np.testing.assert_array_equal(a[k], b[k])


# -- training -----------------------------------------------------------------


def test_zero_rounds_writes_initial_checkpoint_only(tmp_path):
    res = train(TrainConfig(encoder="onedcnn", hp=small_hp(training_rounds=0), out_dir=tmp_path))
    assert [p.name for p in res.checkpoints] == ["ckpt-0"]
    assert res.log_rows == [] and read_train_log(tmp_path / "train_log.csv") == []
    fresh = PolicyNet("onedcnn", gru_hidden=8, seed=derive_seed(0, 0))
    loaded = load_policy(tmp_path / "ckpt-0")
    for name, p in fresh.named_parameters().items():
        np.testing.assert_array_equal(loaded.named_parameters()[name].data, p.data.astype(np.float32))


def test_train_determinism_and_log(tmp_path):
    cfg = dict(encoder="onedcnn", hp=small_hp(training_rounds=2, checkpoint_every=1), seed=4)
    a = train(TrainConfig(**cfg, out_dir=tmp_path / "a"))
    b = train(TrainConfig(**cfg, out_dir=tmp_path / "b"))
    assert [p.name for p in a.checkpoints] == ["ckpt-0", "ckpt-1", "ckpt-2"]
    for f in sorted((tmp_path / "a" / "ckpt-2").iterdir()):
        assert f.read_bytes() == (tmp_path / "b" / "ckpt-2" / f.name).read_bytes()
    rows = read_train_log(tmp_path / "a" / "train_log.csv")
    assert len(rows) == 2 and rows == read_train_log(tmp_path / "b" / "train_log.csv")
    with pytest.raises(ConfigError):
        load_policy(tmp_path / "a" / "ckpt-2", encoder="melspec")


def test_divergence_writes_diagnostic_checkpoint(tmp_path, monkeypatch):
    train_mod = importlib.import_module("blindai.ppo.train")
    real = train_mod.ppo_loss_terms

    def poisoned(net, mb, hp):
        terms = real(net, mb, hp)
        terms.total.data = np.array(np.nan)
        return terms

    monkeypatch.setattr(train_mod, "ppo_loss_terms", poisoned)
    with pytest.raises(StateError):
        train(TrainConfig(encoder="onedcnn", hp=small_hp(training_rounds=3), out_dir=tmp_path))
    assert sorted(p.name for p in tmp_path.iterdir() if p.is_dir()) == ["ckpt-0", "ckpt-1-diverged"]
