"""The 40-action frame-data table (``actions-v1`` files)."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from ..errors import ConfigError

HEADER = "actions-v1"
N_ACTIONS = 40

CATEGORIES = (
    "throw-ground",
    "attack-ground",
    "skill-ground",
    "movement-ground",
    "guard-ground",
    "attack-air",
    "skill-air",
)
CATEGORY_SIZES = {
    "throw-ground": 2,
    "attack-ground": 12,
    "skill-ground": 3,
    "movement-ground": 7,
    "guard-ground": 2,
    "attack-air": 12,
    "skill-air": 2,
}
AIR_CATEGORIES = frozenset({"attack-air", "skill-air"})

# Column order of the int64 table handed to the simulation kernel.
COLUMNS = (
    "category", "damage", "range", "startup", "active", "recovery", "move",
    "projectile_speed", "jump_vy", "jump_vx", "hitstun", "hit_height", "audible",
)
COL = {name: i for i, name in enumerate(COLUMNS)}


@dataclass(frozen=True)
class ActionTable:
    names: tuple
    table: np.ndarray  # (40, len(COLUMNS)) int64

    def __len__(self):
        return len(self.names)

    def id_of(self, name: str) -> int:
        return self.names.index(name)

    def category(self, action_id: int) -> str:
        return CATEGORIES[int(self.table[action_id, COL["category"]])]

    def ids_in(self, category: str) -> list:
        cat = CATEGORIES.index(category)
        return [i for i in range(len(self.names)) if self.table[i, COL["category"]] == cat]

    def get(self, action_id: int, column: str) -> int:
        return int(self.table[action_id, COL[column]])

    def is_air(self, action_id: int) -> bool:
        return self.category(action_id) in AIR_CATEGORIES

    def total_frames(self, action_id: int) -> int:
        row = self.table[action_id]
        return int(row[COL["startup"]] + row[COL["active"]] + row[COL["recovery"]])


def parse_actions(text: str, source: str = "<string>") -> ActionTable:
    first, _, body = text.partition("\n")
    if first.strip() != HEADER:
        raise ConfigError(f"{source}: expected header {HEADER!r}, got {first.strip()!r}")
    reader = csv.DictReader(io.StringIO(body))
    missing = {"id", "name", *COLUMNS} - set(reader.fieldnames or ())
    if missing:
        raise ConfigError(f"{source}: missing columns {sorted(missing)}")
    rows = sorted(reader, key=lambda r: int(r["id"]))
    if [int(r["id"]) for r in rows] != list(range(N_ACTIONS)):
        raise ConfigError(f"{source}: action ids must be exactly 0..{N_ACTIONS - 1}")
    names, table = [], np.zeros((N_ACTIONS, len(COLUMNS)), dtype=np.int64)
    for r in rows:
        name = r["name"].strip()
        if name == "CROUCH":
            raise ConfigError(f"{source}: the CROUCH action is not part of the action set")
        cat = r["category"].strip()
        if cat not in CATEGORIES:
            raise ConfigError(f"{source}: unknown category {cat!r} for {name}")
        names.append(name)
        i = int(r["id"])
        for col in COLUMNS:
            table[i, COL[col]] = CATEGORIES.index(cat) if col == "category" else int(r[col])
    counts = {c: int((table[:, COL["category"]] == i).sum()) for i, c in enumerate(CATEGORIES)}
    if counts != CATEGORY_SIZES:
        raise ConfigError(f"{source}: category sizes {counts} do not match {CATEGORY_SIZES}")
    if len(set(names)) != N_ACTIONS:
        raise ConfigError(f"{source}: action names must be unique")
    return ActionTable(tuple(names), table)


def load_actions(path=None) -> ActionTable:
    if path is None:
        text = resources.files("blindai.arena").joinpath("data/actions.csv").read_text()
        return parse_actions(text, "builtin actions")
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"action table not found: {path}")
    return parse_actions(path.read_text(), str(path))


_DEFAULT: ActionTable | None = None


def default_actions() -> ActionTable:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = load_actions()
    return _DEFAULT
