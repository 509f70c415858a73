"""Full-information opponents: a scripted heuristic and an iteration-budgeted MCTS.

Both read the GameState directly (they stand in for a frame-data AI). Each
policy object is asked for an action only when its player can act.
"""
from __future__ import annotations

import numpy as np

from ..errors import ConfigError, StateError
from . import kernel as K
from .actions import ActionTable, default_actions
from .game import GameState

FIREBALL_RANGE = 250  # beyond this the scripted AI may zone with fireballs
FIREBALL_RATE = 0.35
DASH_RANGE = 220


def _ids(actions: ActionTable):
    return {
        "ground_attacks": actions.ids_in("attack-ground"),
        "air_attacks": actions.ids_in("attack-air"),
        "throws": actions.ids_in("throw-ground"),
        "fireball": actions.id_of("STAND_D_DF_FA"),
        "guard": actions.id_of("STAND_GUARD"),
        "walk": actions.id_of("FORWARD_WALK"),
        "dash": actions.id_of("DASH"),
    }


def _threat(state: GameState, me: int, actions: ActionTable) -> float:
    """Rough probability that something is about to hit ``me``."""
    opp = state.player(1 - me)
    mine = state.player(me)
    dist = abs(opp.x - mine.x)
    threat = 0.0
    if opp.action >= 0 and opp.action != K.WAIT:
        rng_ = actions.get(opp.action, "range")
        su, act = actions.get(opp.action, "startup"), actions.get(opp.action, "active")
        if actions.get(opp.action, "damage") > 0 and opp.action_frames < su + act:
            if rng_ > 0 and dist <= rng_ + 10:
                threat = max(threat, 0.7)
            if actions.get(opp.action, "projectile_speed") > 0:
                threat = max(threat, 0.5)
    for p in state.projectiles():
        if p["owner"] != me and (mine.x - p["x"]) * p["velocity"] > 0 and abs(mine.x - p["x"]) < 200:
            threat = max(threat, 0.9)
    return threat


def _best_in_range(candidates, dist: int, actions: ActionTable):
    best, best_rate = None, -1.0
    for a in candidates:
        if dist <= actions.get(a, "range"):
            rate = actions.get(a, "damage") / actions.total_frames(a)
            if rate > best_rate:
                best, best_rate = a, rate
    return best


def scripted_opponent(state: GameState, skill: float, rng: np.random.Generator,
                      player: int = 1, actions: ActionTable | None = None) -> int:
    """Heuristic policy: approach, hit with the best in-range attack, guard against threats.

    With probability ``1 - skill`` the decision is replaced by a uniformly
    random action id, which is the knob used to weaken it.
    """
    actions = actions or default_actions()
    if rng.random() >= skill:
        return int(rng.integers(K.N_ACTIONS))
    ids = _ids(actions)
    me, opp = state.player(player), state.player(1 - player)
    dist = abs(opp.x - me.x)
    if me.airborne:
        best = _best_in_range(ids["air_attacks"], dist, actions)
        return best if best is not None else ids["air_attacks"][0]
    threat = _threat(state, player, actions)
    if threat > 0 and rng.random() < threat:
        return ids["guard"]
    opp_guarding = opp.action >= 0 and opp.action != K.WAIT and actions.category(opp.action) == "guard-ground"
    if opp_guarding and not opp.airborne:
        throw = _best_in_range(ids["throws"], dist, actions)
        if throw is not None:
            return throw
    best = _best_in_range(ids["ground_attacks"], dist, actions)
    if best is not None:
        return best
    own_proj = any(p["owner"] == player for p in state.projectiles())
    if dist > FIREBALL_RANGE and not own_proj and rng.random() < FIREBALL_RATE:
        return ids["fireball"]
    return ids["dash"] if dist > DASH_RANGE else ids["walk"]


def mcts_opponent(state: GameState, iteration_budget: int, rng: np.random.Generator,
                  player: int = 1, actions: ActionTable | None = None,
                  rollout_frames: int = 60, max_depth: int = 2, c_explore: float = 1.0,
                  score_scale: float = 50.0) -> int:
    """UCT over the simulator forward model with a random opponent model.

    The budget counts search iterations rather than wall-clock time so that
    results are reproducible. A zero budget falls back to the full-skill
    scripted policy.
    """
    if state.over:
        raise StateError("mcts_opponent called on a finished round")
    actions = actions or default_actions()
    if iteration_budget <= 0:
        return scripted_opponent(state, 1.0, rng, player, actions)
    seed = int(rng.integers(1, 2**31 - 1))
    return int(K.mcts_search(state.data, actions.table, player, int(iteration_budget),
                             rollout_frames, max_depth, seed, c_explore, score_scale))


class Policy:
    """Callable ``policy(state, player) -> action`` with its own RNG stream."""

    name = "policy"

    def reset(self, seed: int) -> None:
        self.rng = np.random.default_rng(seed)

    def __call__(self, state: GameState, player: int) -> int:
        raise NotImplementedError


class RandomPolicy(Policy):
    name = "random"

    def __init__(self, seed: int = 0):
        self.reset(seed)

    def __call__(self, state, player):
        return int(self.rng.integers(K.N_ACTIONS))


class ScriptedPolicy(Policy):
    name = "scripted"

    def __init__(self, skill: float = 1.0, seed: int = 0, actions: ActionTable | None = None):
        self.skill = skill
        self.actions = actions or default_actions()
        self.reset(seed)

    def __call__(self, state, player):
        return scripted_opponent(state, self.skill, self.rng, player, self.actions)


class MCTSPolicy(Policy):
    name = "mcts"

    def __init__(self, budget: int = 2000, seed: int = 0, actions: ActionTable | None = None, **search):
        self.budget = budget
        self.actions = actions or default_actions()
        self.search = search
        self.reset(seed)

    def __call__(self, state, player):
        return mcts_opponent(state, self.budget, self.rng, player, self.actions, **self.search)


def make_opponent(kind: str, skill: float = 0.5, budget: int = 2000, seed: int = 0,
                  actions: ActionTable | None = None) -> Policy:
    if kind == "scripted":
        return ScriptedPolicy(skill, seed, actions)
    if kind == "mcts":
        return MCTSPolicy(budget, seed, actions)
    if kind == "random":
        return RandomPolicy(seed)
    raise ConfigError(f"unknown opponent kind {kind!r}; expected scripted, mcts or random")
