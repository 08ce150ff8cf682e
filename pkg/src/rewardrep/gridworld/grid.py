"""Tile grids and the ASCII map format.

Map characters: '#' Wall, '.' Empty, 'L' Lava, 'G' Goal, 'S' fixed start
(optional), one row per line.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from importlib import resources

import numpy as np


class TileKind(IntEnum):
    EMPTY = 0
    WALL = 1
    LAVA = 2
    GOAL = 3


_CHAR_TO_TILE = {
    "#": TileKind.WALL,
    ".": TileKind.EMPTY,
    "L": TileKind.LAVA,
    "G": TileKind.GOAL,
    "S": TileKind.EMPTY,
}


@dataclass
class Grid:
    width: int
    height: int
    tiles: np.ndarray  # (height, width) int8, row-major
    start: tuple[int, int] | None = None
    goal: tuple[int, int] | None = field(default=None)

    def tile(self, x, y) -> TileKind:
        if 0 <= x < self.width and 0 <= y < self.height:
            return TileKind(int(self.tiles[y, x]))
        return TileKind.WALL

    def in_bounds(self, x, y) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def with_goal(self, x, y) -> "Grid":
        """Copy of this grid with exactly one Goal tile at (x, y)."""
        tiles = self.tiles.copy()
        tiles[tiles == TileKind.GOAL] = TileKind.EMPTY
        if TileKind(int(tiles[y, x])) is not TileKind.EMPTY:
            raise ValueError(f"goal position ({x}, {y}) is not an empty tile")
        tiles[y, x] = TileKind.GOAL
        return Grid(self.width, self.height, tiles, self.start, (x, y))

    def empty_cells(self) -> list[tuple[int, int]]:
        ys, xs = np.nonzero(self.tiles == TileKind.EMPTY)
        return [(int(x), int(y)) for x, y in zip(xs, ys)]


def parse_map(text: str) -> Grid:
    rows = [line for line in text.splitlines() if line.strip()]
    if not rows:
        raise ValueError("empty map")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError("ragged map rows")
    tiles = np.zeros((len(rows), width), dtype=np.int8)
    start = None
    goal = None
    for y, row in enumerate(rows):
        for x, ch in enumerate(row):
            if ch not in _CHAR_TO_TILE:
                raise ValueError(f"unknown map character {ch!r} at ({x}, {y})")
            tiles[y, x] = _CHAR_TO_TILE[ch]
            if ch == "S":
                start = (x, y)
            elif ch == "G":
                goal = (x, y)
    return Grid(width, len(rows), tiles, start, goal)


def load_map(name: str) -> Grid:
    text = resources.files("rewardrep.gridworld").joinpath(f"maps/{name}.map").read_text()
    return parse_map(text)
