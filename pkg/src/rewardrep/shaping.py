"""Potential-based reward shaping.

The main shaper turns the trained reward predictor into a potential
f*(s) = predict(s, goal) * (H - I) / H and emits F = gamma * f*(s') - f*(s),
added to the environment reward. I (episodes seen) is frozen within an
episode, so F telescopes exactly over the episode. Two coordinate-based
comparators (negative distance, anti-goals) are included for contrast.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MODES = ("predictor", "negdist", "antigoal", "none")


class ShapingConfigError(ValueError):
    pass


@dataclass
class ShapingConfig:
    mode: str = "none"
    gamma: float = 0.99
    horizon: int = 500  # H: number of episodes over which shaping decays to 0
    delta: int = 0  # goal threshold in tiles for the distance comparators
    antigoals: list[tuple[int, int]] = field(default_factory=list)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ShapingConfigError(f"unknown shaping mode {self.mode!r}")
        if not 0.0 < self.gamma < 1.0:
            raise ShapingConfigError("shaping gamma must be in (0, 1)")
        if self.horizon < 1:
            raise ShapingConfigError("shaping horizon must be positive")


def decay_scale(episode: int, horizon: int) -> float:
    """(H - I) / H, clamped to 0 once I >= H."""
    return max(0.0, (horizon - episode) / horizon)


class PredictorPotential:
    """Per-episode potential over observations, built from a trained model.

    The episode index is frozen at construction; build a fresh instance per
    episode so the shaped reward stays exactly potential-based within it.
    """

    def __init__(self, model, goal_obs, config: ShapingConfig, episode: int):
        if model is None:
            raise ShapingConfigError("predictor shaping requires a trained model")
        self.model = model
        self.goal_obs = goal_obs
        self.gamma = config.gamma
        self.scale = decay_scale(episode, config.horizon)

    def potential(self, obs) -> float:
        if self.scale == 0.0:
            return 0.0
        return float(self.model.predict_reward(obs, self.goal_obs)) * self.scale

    def shape(self, prev_obs, next_obs) -> float:
        """F = gamma * f*(s') - f*(s); zero once the decay has run out."""
        if self.scale == 0.0:
            return 0.0
        return self.gamma * self.potential(next_obs) - self.potential(prev_obs)


def manhattan(a, b) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def shape_negdist(next_agent, goal, delta: int = 0) -> float:
    """1 at the goal threshold, else the negative tile distance to the goal."""
    d = manhattan(next_agent, goal)
    return 1.0 if d <= delta else -float(d)


def shape_antigoal(prev_agent, next_agent, goal, antigoals, delta: int = 0) -> float:
    """Negative-distance bonus offset by the nearest anti-goal, clamped at 0."""
    d = manhattan(next_agent, goal)
    if d <= delta:
        return 1.0
    if not antigoals:
        return min(0.0, -float(d))
    d_anti = min(manhattan(prev_agent, ag) for ag in antigoals)
    return min(0.0, -float(d) + float(d_anti))


def telescoping_residual(potentials, bonuses, gamma: float) -> float:
    """| sum_t gamma^t F_t - (gamma^T f*(s_T) - f*(s_0)) | for one episode.

    `potentials` holds f*(s_0..s_T); `bonuses` the T per-step F values.
    The identity holds analytically for any frozen-scale potential.
    """
    potentials = np.asarray(potentials, dtype=np.float64)
    bonuses = np.asarray(bonuses, dtype=np.float64)
    big_t = len(bonuses)
    if len(potentials) != big_t + 1:
        raise ValueError("need T+1 potentials for T bonuses")
    lhs = float(np.sum(gamma ** np.arange(big_t) * bonuses))
    rhs = gamma**big_t * potentials[-1] - potentials[0]
    return abs(lhs - rhs)
