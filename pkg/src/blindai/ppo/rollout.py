"""One round of the blind agent against a full-information opponent.

The agent only ever receives rendered stereo audio. It picks an action on
frames where its character can act; the HP-difference reward of every frame
until the next decision is credited to that action.
"""
from __future__ import annotations

import numpy as np

from ..arena.actions import ActionTable, default_actions
from ..arena.game import RoundResult, Simulator, reset, round_result
from ..arena.sound import AudioRenderer, SoundDesign
from ..encoders import AudioRingBuffer
from ..errors import StateError
from ..seeding import derive_seed
from .buffer import RolloutBuffer
from .net import PolicyNet


class BlindAgent:
    """Stateful wrapper: audio in, action out. Keeps the ring buffer and GRU state."""

    def __init__(self, net: PolicyNet, design: SoundDesign, player: int = 0,
                 greedy: bool = False, seed: int = 0):
        self.net = net
        self.player = player
        self.greedy = greedy
        self.renderer = AudioRenderer(design, player)
        self.ring = AudioRingBuffer()
        self.reset(seed)

    def reset(self, seed: int) -> None:
        self.renderer.reset()
        self.ring.reset()
        self.hidden = self.net.initial_hidden()
        self.rng = np.random.default_rng(seed)

    def hear(self, state, events) -> np.ndarray:
        left, right = self.renderer.render_arrays(state, events)
        stereo = np.stack([left, right])
        self.ring.push(stereo)
        return stereo

    def decide(self):
        """Returns ``(action, logp, value, obs, hidden_before)``."""
        obs = self.net.encoder.preprocess(self.ring)
        h_before = self.hidden
        probs, value, self.hidden = self.net.act(obs, h_before)
        if self.greedy:
            a = int(np.argmax(probs))
        else:
            a = int(self.rng.choice(len(probs), p=probs))
        return a, float(np.log(max(probs[a], 1e-300))), value, obs, h_before


def collect_rollout(net: PolicyNet, opponent, design: SoundDesign, hp, seed: int,
                    greedy: bool = False, mirrored: bool = False,
                    actions: ActionTable | None = None, audio_log: list | None = None):
    """Play one round as player 1; returns ``(buffer, RoundResult, v_last)``.

    ``opponent`` is a policy object with ``reset(seed)`` and
    ``__call__(state, player)``. ``audio_log``, when given, receives the
    stereo frame heard after every step.
    """
    actions = actions or default_actions()
    state = reset(seed, mirrored)
    sim = Simulator(state, actions)
    agent = BlindAgent(net, design, 0, greedy, derive_seed(seed, 1))
    opponent.reset(derive_seed(seed, 2))
    buf = RolloutBuffer()
    while not state.over and state.frame < hp.rollout_horizon:
        if state.is_free(0):
            a1, logp, value, obs, h = agent.decide()
            buf.add(obs, a1, logp, value, h)
        else:
            a1 = -1
        a2 = opponent(state, 1) if state.is_free(1) else -1
        events, (r1, _) = sim.step(a1, a2)
        if not buf.actions:
            raise StateError("agent received reward before its first decision")
        buf.rewards[-1] += r1
        heard = agent.hear(state, events)
        if audio_log is not None:
            audio_log.append(heard)
    v_last = 0.0
    if state.over:
        buf.dones[-1] = True
    else:
        _, v_last, _ = net.act(net.encoder.preprocess(agent.ring), agent.hidden)
    buf.check()
    return buf, round_result(state, 0), v_last


def play_blind_round(net: PolicyNet, opponent, design: SoundDesign, seed: int,
                     greedy: bool = True, mirrored: bool = False,
                     actions: ActionTable | None = None) -> RoundResult:
    """Evaluation round; no buffer kept."""
    actions = actions or default_actions()
    state = reset(seed, mirrored)
    sim = Simulator(state, actions)
    agent = BlindAgent(net, design, 0, greedy, derive_seed(seed, 1))
    opponent.reset(derive_seed(seed, 2))
    while not state.over:
        a1 = agent.decide()[0] if state.is_free(0) else -1
        a2 = opponent(state, 1) if state.is_free(1) else -1
        events, _ = sim.step(a1, a2)
        agent.hear(state, events)
    return round_result(state, 0)


def play_blind_selfplay(net1: PolicyNet, net2: PolicyNet, design: SoundDesign, seed: int,
                        mirrored: bool = False, actions: ActionTable | None = None) -> RoundResult:
    """Two greedy blind agents, each hearing the round from its own side."""
    actions = actions or default_actions()
    state = reset(seed, mirrored)
    sim = Simulator(state, actions)
    agents = [BlindAgent(net1, design, 0, True, derive_seed(seed, 1)),
              BlindAgent(net2, design, 1, True, derive_seed(seed, 1))]
    while not state.over:
        a = [ag.decide()[0] if state.is_free(p) else -1 for p, ag in enumerate(agents)]
        events, _ = sim.step(a[0], a[1])
        for ag in agents:
            ag.hear(state, events)
    return round_result(state, 0)

