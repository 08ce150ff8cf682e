"""Egocentric 7x7-window rendering at 4x4 pixels per tile.

The agent sits at the bottom-center window cell facing "up". Visibility is
an iterative flood from the (fully visible) bottom row: a cell becomes
visible if any adjacent visible cell is non-blocking; walls are painted when
seen but never propagate visibility. Occluded and out-of-world cells render
as the unseen color.
"""

from __future__ import annotations

import numpy as np

from rewardrep.gridworld.grid import Grid, TileKind

WINDOW = 7
TILE_PX = 4
OBS_SHAPE = (WINDOW * TILE_PX, WINDOW * TILE_PX, 3)

COLORS = {
    TileKind.EMPTY: (0.6, 0.6, 0.6),
    TileKind.WALL: (0.3, 0.3, 0.3),
    TileKind.LAVA: (1.0, 0.5, 0.0),
    TileKind.GOAL: (0.0, 0.8, 0.0),
}
UNSEEN_COLOR = (0.0, 0.0, 0.0)
AGENT_COLOR = (0.9, 0.1, 0.1)

# North, East, South, West in screen coordinates (y grows downward).
DIR_VECTORS = ((0, -1), (1, 0), (0, 1), (-1, 0))

_AGENT_WX, _AGENT_WY = WINDOW // 2, WINDOW - 1
_OUT = -1  # marker for out-of-world window cells

# Color lookup indexed by tile id; slot 4 holds the unseen color.
_LUT = np.zeros((5, 3), dtype=np.float32)
for _kind, _rgb in COLORS.items():
    _LUT[int(_kind)] = _rgb
_LUT[4] = UNSEEN_COLOR

_AHEAD, _SIDE = np.meshgrid(
    np.arange(WINDOW - 1, -1, -1), np.arange(WINDOW) - _AGENT_WX, indexing="ij"
)


def window_cells(grid: Grid, x: int, y: int, direction: int) -> np.ndarray:
    """(WINDOW, WINDOW) array of tile ids; -1 for out-of-world cells."""
    fx, fy = DIR_VECTORS[direction]
    rx, ry = -fy, fx  # forward rotated 90 degrees clockwise
    gx = x + fx * _AHEAD + rx * _SIDE
    gy = y + fy * _AHEAD + ry * _SIDE
    inside = (gx >= 0) & (gx < grid.width) & (gy >= 0) & (gy < grid.height)
    cells = np.full((WINDOW, WINDOW), _OUT, dtype=np.int8)
    cells[inside] = grid.tiles[gy[inside], gx[inside]]
    return cells


def visibility(cells: np.ndarray) -> np.ndarray:
    vis = np.zeros((WINDOW, WINDOW), dtype=bool)
    vis[_AGENT_WY, :] = True
    passes = (cells != int(TileKind.WALL)) & (cells != _OUT)
    while True:
        src = vis & passes
        spread = src.copy()
        spread[:-1, :] |= src[1:, :]
        spread[1:, :] |= src[:-1, :]
        grown = spread.copy()
        grown[:, :-1] |= spread[:, 1:]
        grown[:, 1:] |= spread[:, :-1]
        new = vis | grown
        if np.array_equal(new, vis):
            return vis
        vis = new


def render_window(grid: Grid, x: int, y: int, direction: int) -> np.ndarray:
    """28x28x3 float32 observation in [0, 1] for a pose, deterministic."""
    cells = window_cells(grid, x, y, direction)
    vis = visibility(cells)
    idx = np.where(vis & (cells != _OUT), cells, 4).astype(np.intp)
    img = _LUT[idx]
    px = np.repeat(np.repeat(img, TILE_PX, axis=0), TILE_PX, axis=1)
    # The agent is drawn over its tile, not instead of it: the cell keeps
    # the underlying tile color with a red marker in its 2x2 center. A
    # solid-red agent cell would make standing-on-goal views identical to
    # standing-on-empty views with congruent surroundings, which destroys
    # the terminal transitions' training signal.
    r0, c0 = _AGENT_WY * TILE_PX, _AGENT_WX * TILE_PX
    px[r0 + 1 : r0 + 3, c0 + 1 : c0 + 3] = AGENT_COLOR
    return px


def render_observation(state) -> np.ndarray:
    return render_window(state.grid, state.pose.x, state.pose.y, state.pose.direction)


def goal_observation(grid: Grid) -> np.ndarray:
    """View from the pose one Forward-step before the goal.

    The viewing pose is an Empty neighbor of the goal, facing the goal;
    independent of the agent's pose. Among the candidate approach
    directions, directions where the tile directly behind the goal is
    blocked (Wall/Lava or the grid edge) are preferred, so the goal is seen
    head-on against its backdrop; this makes the goal view identify the
    goal's local surroundings rather than whatever happens to lie beyond
    it. Ties and the no-backdrop case fall back to North, East, South, West
    priority.
    """
    if grid.goal is None:
        raise ValueError("grid has no goal")
    gx, gy = grid.goal

    def blocked(x, y):
        if not (0 <= x < grid.width and 0 <= y < grid.height):
            return True
        return grid.tile(x, y) != TileKind.EMPTY

    candidates = []  # (no_backdrop, priority, pose)
    for direction, (dx, dy) in enumerate(DIR_VECTORS):
        px, py = gx - dx, gy - dy  # one Forward-step before the goal
        if not (0 <= px < grid.width and 0 <= py < grid.height):
            continue
        if grid.tile(px, py) != TileKind.EMPTY:
            continue
        backdrop = blocked(gx + dx, gy + dy)
        candidates.append((not backdrop, direction, (px, py, direction)))
    if not candidates:
        raise ValueError(f"goal at ({gx}, {gy}) has no empty neighbor")
    _, _, (px, py, facing) = min(candidates)
    return render_window(grid, px, py, facing)


def write_ppm(obs: np.ndarray, path) -> None:
    """Debug dump of an observation as a binary P6 PPM."""
    arr = np.clip(np.asarray(obs) * 255.0, 0, 255).astype(np.uint8)
    h, w, _ = arr.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode())
        fh.write(arr.tobytes())
