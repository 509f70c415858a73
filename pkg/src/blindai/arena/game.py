from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgument, StateError
from . import kernel as K
from .actions import ActionTable, default_actions

EVENT_NAMES = (
    "start-throw-ground",
    "start-attack-ground",
    "start-skill-ground",
    "start-movement-ground",
    "start-guard-ground",
    "start-attack-air",
    "start-skill-air",
    "hit",
    "guard",
    "projectile-launch",
    "projectile-travel",
    "round-start",
    "heavy-damage",
)
assert len(EVENT_NAMES) == K.N_EVENT_TYPES


class Winner(str, enum.Enum):
    P1 = "p1"
    P2 = "p2"
    DRAW = "draw"


@dataclass(frozen=True)
class SoundEvent:
    kind: int  # index into EVENT_NAMES
    x: int  # stage position of the source
    owner: int  # 0 or 1, -1 for global events

    @property
    def name(self) -> str:
        return EVENT_NAMES[self.kind]


@dataclass(frozen=True)
class PlayerView:
    x: int
    y: int
    hp: int
    action: int  # -1 when idle
    action_frames: int
    hitstun: int
    facing: int

    @property
    def airborne(self) -> bool:
        return self.y > 0


class GameState:
    """Read-mostly view over the flat int64 state vector used by the kernel."""

    __slots__ = ("data",)

    def __init__(self, data: np.ndarray):
        self.data = data

    def copy(self) -> "GameState":
        return GameState(self.data.copy())

    @property
    def frame(self) -> int:
        return int(self.data[K.S_FRAME])

    @property
    def over(self) -> bool:
        return bool(self.data[K.S_OVER])

    @property
    def rng_seed(self) -> int:
        return int(self.data[K.S_SEED])

    def _p(self, i: int, field: int) -> int:
        return int(self.data[K.P0 + i * K.PSTRIDE + field])

    def player(self, i: int) -> PlayerView:
        return PlayerView(
            x=self._p(i, K.PX), y=self._p(i, K.PY), hp=self._p(i, K.PHP),
            action=self._p(i, K.PACT), action_frames=self._p(i, K.PAFR),
            hitstun=self._p(i, K.PSTUN), facing=self._p(i, K.PFACE),
        )

    def hp(self, i: int) -> int:
        return self._p(i, K.PHP)

    def x(self, i: int) -> int:
        return self._p(i, K.PX)

    def is_free(self, i: int) -> bool:
        return self._p(i, K.PACT) < 0 and self._p(i, K.PSTUN) == 0

    def projectiles(self) -> list[dict]:
        out = []
        for q in range(K.NPROJ):
            b = K.Q0 + q * K.QSTRIDE
            if self.data[b + K.QACTIVE]:
                out.append({
                    "owner": int(self.data[b + K.QOWNER]),
                    "x": int(self.data[b + K.QX]),
                    "y": int(self.data[b + K.QY]),
                    "velocity": int(self.data[b + K.QVX]),
                    "damage": int(self.data[b + K.QDMG]),
                })
        return out

    def __eq__(self, other):
        return isinstance(other, GameState) and np.array_equal(self.data, other.data)

    def __repr__(self):
        return f"GameState(frame={self.frame}, hp=({self.hp(0)}, {self.hp(1)}), over={self.over})"


@dataclass(frozen=True)
class RoundResult:
    winner: Winner
    hp_self_end: int
    hp_opp_end: int
    frames_played: int


def reset(seed: int = 0, mirrored: bool = False) -> GameState:
    """Fresh round. The start layout ignores ``seed``; it is stored for policy RNG streams.

    ``mirrored`` swaps the start sides (player 1 on the right).
    """
    s = np.zeros(K.STATE_LEN, dtype=np.int64)
    K.reset_kernel(s, np.int64(seed & 0x7FFFFFFFFFFFFFFF), 1 if mirrored else 0)
    return GameState(s)


def _check_action(a: int) -> int:
    a = int(a)
    if not -1 <= a < K.N_ACTIONS:
        raise InvalidArgument(f"action id must be in [-1, {K.N_ACTIONS - 1}], got {a}")
    return a


class Simulator:
    """Steps one round in place, reusing scratch buffers. Used by the round runners."""

    def __init__(self, state: GameState, actions: ActionTable | None = None):
        self.state = state
        self.table = (actions or default_actions()).table
        self._ev = np.zeros((K.MAX_EVENTS, 3), dtype=np.int64)

    def step(self, a1: int, a2: int):
        s = self.state
        if s.data[K.S_OVER]:
            raise StateError("round is over; call reset() for a new round")
        hp1, hp2 = int(s.data[K.P0 + K.PHP]), int(s.data[K.P0 + K.PSTRIDE + K.PHP])
        n = K.step_kernel(s.data, self.table, _check_action(a1), _check_action(a2), self._ev)
        events = [SoundEvent(int(e[0]), int(e[1]), int(e[2])) for e in self._ev[:n]]
        nhp1, nhp2 = int(s.data[K.P0 + K.PHP]), int(s.data[K.P0 + K.PSTRIDE + K.PHP])
        r1 = (hp2 - nhp2) + (nhp1 - hp1)
        return events, (r1, -r1)


def step(state: GameState, a1: int, a2: int, actions: ActionTable | None = None):
    """Advance one frame. Returns ``(new_state, events, (r1, r2))``; the input state is untouched."""
    sim = Simulator(state.copy(), actions)
    events, rewards = sim.step(a1, a2)
    return sim.state, events, rewards


def round_result(state: GameState, me: int = 0) -> RoundResult:
    """Winner by knockout or higher remaining HP; equal HP is a draw."""
    h0, h1 = state.hp(0), state.hp(1)
    if h0 > h1:
        w = Winner.P1
    elif h1 > h0:
        w = Winner.P2
    else:
        w = Winner.DRAW
    return RoundResult(w, state.hp(me), state.hp(1 - me), state.frame)
