"""Environment dynamics for the two-room, lava-gap, and four-room worlds.

Transitions are deterministic: turns rotate in place, Forward moves onto the
faced tile iff it is walkable; entering the goal terminates with reward
1 - 0.9 * steps / 100, entering lava terminates with reward 0, and episodes
time out at 100 steps with reward 0.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import IntEnum

import numpy as np

from rewardrep.gridworld.grid import Grid, TileKind, load_map
from rewardrep.gridworld.render import DIR_VECTORS, goal_observation, render_window

MAX_STEPS = 100
_REWARD_SLOPE = 0.9


class UsageError(RuntimeError):
    """API misuse, e.g. stepping an already-terminated episode."""


class Action(IntEnum):
    TURN_LEFT = 0
    TURN_RIGHT = 1
    FORWARD = 2


@dataclass(frozen=True)
class AgentPose:
    x: int
    y: int
    direction: int  # 0 North, 1 East, 2 South, 3 West


@dataclass(frozen=True)
class EnvState:
    grid: Grid
    pose: AgentPose
    goal: tuple[int, int]
    steps: int = 0
    terminated: bool = False
    timeout: bool = False


@dataclass(frozen=True)
class Truth:
    """Ground-truth side channel for oracles and coordinate-based shaping."""

    agent: tuple[int, int]
    prev_agent: tuple[int, int]
    goal: tuple[int, int]
    steps: int
    timeout: bool


@dataclass(frozen=True)
class StepOutcome:
    observation: np.ndarray
    reward: float
    done: bool
    truth: Truth


def goal_reward(steps: int) -> float:
    return 1.0 - _REWARD_SLOPE * steps / MAX_STEPS


def step(state: EnvState, action: Action) -> tuple[EnvState, StepOutcome]:
    if state.terminated:
        raise UsageError("cannot step a terminated episode")
    pose = state.pose
    steps = state.steps + 1
    reward = 0.0
    done = False
    timeout = False

    if action == Action.TURN_LEFT:
        pose = replace(pose, direction=(pose.direction - 1) % 4)
    elif action == Action.TURN_RIGHT:
        pose = replace(pose, direction=(pose.direction + 1) % 4)
    elif action == Action.FORWARD:
        dx, dy = DIR_VECTORS[pose.direction]
        tx, ty = pose.x + dx, pose.y + dy
        tile = state.grid.tile(tx, ty)
        if tile == TileKind.EMPTY:
            pose = replace(pose, x=tx, y=ty)
        elif tile == TileKind.GOAL:
            pose = replace(pose, x=tx, y=ty)
            reward = goal_reward(steps)
            done = True
        elif tile == TileKind.LAVA:
            pose = replace(pose, x=tx, y=ty)
            done = True
        # Wall: nothing happens.
    else:
        raise UsageError(f"unknown action {action!r}")

    if not done and steps >= MAX_STEPS:
        done = True
        timeout = True

    new_state = EnvState(state.grid, pose, state.goal, steps, done, timeout)
    obs = render_window(state.grid, pose.x, pose.y, pose.direction)
    truth = Truth(
        agent=(pose.x, pose.y),
        prev_agent=(state.pose.x, state.pose.y),
        goal=state.goal,
        steps=steps,
        timeout=timeout,
    )
    return new_state, StepOutcome(obs, reward, done, truth)


def enumerate_poses(grid: Grid) -> list[tuple[int, int, int]]:
    """Every Empty tile x 4 directions, row-major then direction order."""
    return [(x, y, d) for (x, y) in grid.empty_cells() for d in range(4)]


class GridEnv:
    """One environment instance: holds its RNG, resets into fresh states."""

    kind = "base"

    def __init__(self, seed=0):
        self.rng = np.random.default_rng(seed)
        self.state: EnvState | None = None
        self.goal_obs: np.ndarray | None = None

    def _sample(self) -> EnvState:
        raise NotImplementedError

    def reset(self):
        """New episode; returns (state, observation, goal observation)."""
        self.state = self._sample()
        obs = render_window(
            self.state.grid, self.state.pose.x, self.state.pose.y, self.state.pose.direction
        )
        self.goal_obs = goal_observation(self.state.grid)
        return self.state, obs, self.goal_obs

    def step(self, action: Action) -> StepOutcome:
        self.state, outcome = step(self.state, action)
        return outcome


# Two-room goal slots: bottom-room center and top-room left are the training
# goals (sampled 50/50 during data collection); top-room right is held out.
TWO_ROOM_GOALS = {
    "train0": (4, 12),
    "train1": (1, 2),
    "test": (6, 2),
}


class TwoRoomEnv(GridEnv):
    kind = "two-room"

    def __init__(self, seed=0, goal="train0"):
        super().__init__(seed)
        if goal not in ("train",) and goal not in TWO_ROOM_GOALS:
            raise ValueError(f"unknown two-room goal {goal!r}")
        self.goal_mode = goal
        self.base = load_map("two_room")

    def _sample(self) -> EnvState:
        if self.goal_mode == "train":
            name = "train0" if self.rng.random() < 0.5 else "train1"
        else:
            name = self.goal_mode
        goal = TWO_ROOM_GOALS[name]
        grid = self.base.with_goal(*goal)
        direction = int(self.rng.integers(4))
        sx, sy = self.base.start
        return EnvState(grid, AgentPose(sx, sy, direction), goal)


class LavaGapEnv(GridEnv):
    """6x6 world enclosing a 4x4 room; a lava column with one gap.

    Eight variants: column one or two tiles in front of the start, gap in
    one of the four interior rows. Start is the upper-left corner facing
    the column; the goal is the lower-right corner.
    """

    kind = "lava-gap"

    def __init__(self, seed=0):
        super().__init__(seed)

    @staticmethod
    def build_grid(offset: int, gap_row: int) -> Grid:
        if offset not in (1, 2) or gap_row not in (1, 2, 3, 4):
            raise ValueError("lava gap variant out of range")
        tiles = np.full((6, 6), TileKind.WALL, dtype=np.int8)
        tiles[1:5, 1:5] = TileKind.EMPTY
        col = 1 + offset
        for y in range(1, 5):
            if y != gap_row:
                tiles[y, col] = TileKind.LAVA
        tiles[4, 4] = TileKind.GOAL
        return Grid(6, 6, tiles, start=(1, 1), goal=(4, 4))

    def _sample(self) -> EnvState:
        offset = int(self.rng.integers(1, 3))
        gap_row = int(self.rng.integers(1, 5))
        grid = self.build_grid(offset, gap_row)
        return EnvState(grid, AgentPose(1, 1, 1), (4, 4))  # facing East


class FourRoomEnv(GridEnv):
    kind = "four-room"

    def __init__(self, seed=0):
        super().__init__(seed)
        self.base = load_map("four_room")
        self._cells = self.base.empty_cells()

    def _sample(self) -> EnvState:
        i, j = self.rng.choice(len(self._cells), size=2, replace=False)
        agent, goal = self._cells[int(i)], self._cells[int(j)]
        grid = self.base.with_goal(*goal)
        direction = int(self.rng.integers(4))
        return EnvState(grid, AgentPose(agent[0], agent[1], direction), goal)


ENV_KINDS = {
    "two-room": TwoRoomEnv,
    "lava-gap": LavaGapEnv,
    "four-room": FourRoomEnv,
}


def make_env(kind: str, seed=0, **kwargs) -> GridEnv:
    if kind not in ENV_KINDS:
        raise ValueError(f"unknown environment kind {kind!r}; options: {sorted(ENV_KINDS)}")
    return ENV_KINDS[kind](seed=seed, **kwargs)
