"""Round runners for full-information policies, and replay logs."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from . import kernel as K
from .actions import ActionTable, default_actions
from .game import GameState, RoundResult, Simulator, reset, round_result

REPLAY_FIELDS = ("frame", "a1", "a2", "hp1", "hp2")


@dataclass(frozen=True)
class ReplayRecord:
    frame: int
    a1: int
    a2: int
    hp1: int
    hp2: int


def play_round(policy1, policy2, seed: int = 0, mirrored: bool = False,
               actions: ActionTable | None = None, record: bool = False):
    """Play one round between two ``policy(state, player)`` callables.

    Policies are consulted only on frames where their player can act.
    Returns ``(RoundResult from player 1's side, replay records or None)``.
    """
    actions = actions or default_actions()
    state = reset(seed, mirrored)
    sim = Simulator(state, actions)
    log = [] if record else None
    while not state.over:
        a1 = policy1(state, 0) if state.is_free(0) else -1
        a2 = policy2(state, 1) if state.is_free(1) else -1
        frame = state.frame
        sim.step(a1, a2)
        if record:
            log.append(ReplayRecord(frame, a1, a2, state.hp(0), state.hp(1)))
    return round_result(state, 0), log


def write_replay(path, records) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(REPLAY_FIELDS)
        for r in records:
            w.writerow([r.frame, r.a1, r.a2, r.hp1, r.hp2])


def read_replay(path) -> list[ReplayRecord]:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"replay log not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != REPLAY_FIELDS:
            raise ConfigError(f"{path}: expected columns {','.join(REPLAY_FIELDS)}")
        return [ReplayRecord(*(int(row[k]) for k in REPLAY_FIELDS)) for row in reader]


def replay_inputs(records, seed: int = 0, mirrored: bool = False,
                  actions: ActionTable | None = None) -> tuple[GameState, np.ndarray]:
    """Re-run logged inputs; returns the final state and the (frames, 2) HP trajectory."""
    actions = actions or default_actions()
    state = reset(seed, mirrored)
    a1 = np.array([r.a1 for r in records], dtype=np.int64)
    a2 = np.array([r.a2 for r in records], dtype=np.int64)
    ev = np.zeros((K.MAX_EVENTS, 3), dtype=np.int64)
    hp = K.run_frames(state.data, actions.table, a1, a2, ev)
    return state, hp


def verify_replay(records, seed: int = 0, mirrored: bool = False, actions=None) -> bool:
    _, hp = replay_inputs(records, seed, mirrored, actions)
    logged = np.array([[r.hp1, r.hp2] for r in records], dtype=np.int64).reshape(-1, 2)
    frames_ok = [r.frame for r in records] == list(range(len(records)))
    return frames_ok and np.array_equal(hp, logged)
