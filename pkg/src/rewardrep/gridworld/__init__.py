"""Deterministic single-goal gridworlds with egocentric pixel observations."""

from rewardrep.gridworld.grid import Grid, TileKind, parse_map
from rewardrep.gridworld.env import (
    Action,
    AgentPose,
    EnvState,
    FourRoomEnv,
    GridEnv,
    LavaGapEnv,
    StepOutcome,
    Truth,
    TwoRoomEnv,
    UsageError,
    enumerate_poses,
    goal_reward,
    make_env,
    step,
)
from rewardrep.gridworld.render import (
    goal_observation,
    render_observation,
    write_ppm,
)

__all__ = [
    "Action",
    "AgentPose",
    "EnvState",
    "FourRoomEnv",
    "Grid",
    "GridEnv",
    "LavaGapEnv",
    "StepOutcome",
    "TileKind",
    "Truth",
    "TwoRoomEnv",
    "UsageError",
    "enumerate_poses",
    "goal_observation",
    "goal_reward",
    "make_env",
    "parse_map",
    "render_observation",
    "step",
    "write_ppm",
]
