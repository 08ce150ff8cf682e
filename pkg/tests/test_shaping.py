import numpy as np
import pytest

from rewardrep.shaping import (
    PredictorPotential,
    ShapingConfig,
    ShapingConfigError,
    decay_scale,
    manhattan,
    shape_antigoal,
    shape_negdist,
    telescoping_residual,
)


class StubModel:
    """Predictor stand-in returning a fixed value per observation key."""

    def __init__(self, table, default=0.5):
        self.table = table
        self.default = default

    def predict_reward(self, obs, goal_obs):
        return self.table.get(float(np.asarray(obs).flat[0]), self.default)


def obs_for(v):
    out = np.zeros((28, 28, 3), dtype=np.float32)
    out.flat[0] = v
    return out


GOAL_OBS = np.zeros((28, 28, 3), dtype=np.float32)


# ------------------------------------------------------------------ config


def test_config_validation():
    ShapingConfig(mode="predictor", gamma=0.99, horizon=500)
    with pytest.raises(ShapingConfigError):
        ShapingConfig(mode="bogus")
    with pytest.raises(ShapingConfigError):
        ShapingConfig(mode="predictor", gamma=1.5)
    with pytest.raises(ShapingConfigError):
        ShapingConfig(mode="predictor", horizon=0)


# ------------------------------------------------------------------- decay


def test_decay_scale_endpoints_and_monotonicity():
    assert decay_scale(0, 100) == pytest.approx(1.0)
    assert decay_scale(100, 100) == 0.0
    assert decay_scale(250, 100) == 0.0  # clamped past the horizon
    scales = [decay_scale(i, 100) for i in range(0, 120, 5)]
    assert all(a >= b for a, b in zip(scales, scales[1:]))


def test_decay_scale_arithmetic():
    assert decay_scale(25, 100) == pytest.approx(0.75)


# ------------------------------------------------- decayed predictor shaping


def test_predictor_shaping_hand_value():
    model = StubModel({1.0: 0.4, 2.0: 0.8})
    cfg = ShapingConfig(mode="predictor", gamma=0.99, horizon=100)
    pot = PredictorPotential(model, GOAL_OBS, cfg, episode=25)
    f = pot.shape(obs_for(1.0), obs_for(2.0))
    assert f == pytest.approx(0.75 * (0.99 * 0.8 - 0.4))
    assert f == pytest.approx(0.294)


def test_constant_predictor_shaping():
    c = 0.6
    model = StubModel({}, default=c)
    cfg = ShapingConfig(mode="predictor", gamma=0.99, horizon=100)
    pot = PredictorPotential(model, GOAL_OBS, cfg, episode=0)  # scale 1
    f = pot.shape(obs_for(1.0), obs_for(2.0))
    assert f == pytest.approx((0.99 - 1.0) * c)


def test_shaping_vanishes_at_horizon():
    model = StubModel({1.0: 0.1, 2.0: 0.9})
    cfg = ShapingConfig(mode="predictor", gamma=0.99, horizon=100)
    for episode in (100, 101, 10_000):
        pot = PredictorPotential(model, GOAL_OBS, cfg, episode=episode)
        assert pot.shape(obs_for(1.0), obs_for(2.0)) == 0.0


def test_episode_index_frozen_within_potential():
    model = StubModel({1.0: 0.4, 2.0: 0.8})
    cfg = ShapingConfig(mode="predictor", gamma=0.99, horizon=100)
    pot = PredictorPotential(model, GOAL_OBS, cfg, episode=25)
    first = pot.shape(obs_for(1.0), obs_for(2.0))
    # repeated transitions inside one episode use the same frozen scale
    assert pot.shape(obs_for(1.0), obs_for(2.0)) == first


# ----------------------------------------------------------- comparators


def test_manhattan():
    assert manhattan((1, 2), (4, 6)) == 7
    assert manhattan((3, 3), (3, 3)) == 0


def test_negdist_values():
    goal = (4, 4)
    assert shape_negdist(goal, goal, delta=0) == 1.0  # on the goal
    assert shape_negdist((0, 3), goal, delta=0) == -5.0
    assert shape_negdist((4, 3), goal, delta=1) == 1.0  # within delta


def test_negdist_ignores_walls():
    # Manhattan distance knows nothing about the dividing wall: a tile on
    # the far side of a wall can score better than a detour tile on the
    # true shortest path. This pathology motivates the learned potential.
    goal = (4, 12)
    adjacent_through_wall = (4, 11)
    on_path_detour = (3, 9)
    assert shape_negdist(adjacent_through_wall, goal) > shape_negdist(
        on_path_detour, goal
    )


def test_antigoal_values():
    goal, anti = (4, 4), [(0, 0)]
    assert shape_antigoal((1, 1), goal, goal, anti, delta=0) == 1.0
    # d(s', g) = 4, d(s, anti) = 1 -> -4 + 1 = -3
    assert shape_antigoal((1, 0), (0, 4), goal, anti, delta=0) == -3.0
    # positive combination clamps to 0
    assert shape_antigoal((4, 0), (4, 3), goal, anti, delta=0) == 0.0


# -------------------------------------------------------------- telescoping


def test_telescoping_single_transition():
    gamma = 0.95
    potentials = [0.3, 0.7]
    bonuses = [gamma * 0.7 - 0.3]
    assert telescoping_residual(potentials, bonuses, gamma) < 1e-12


def test_telescoping_constant_potential_gamma_one():
    potentials = [0.4] * 11
    bonuses = [1.0 * 0.4 - 0.4] * 10
    assert all(b == 0.0 for b in bonuses)
    assert telescoping_residual(potentials, bonuses, 1.0) == 0.0


def test_telescoping_random_episodes():
    rng = np.random.default_rng(0)
    cfg = ShapingConfig(mode="predictor", gamma=0.99, horizon=100)
    for episode in range(100):
        values = rng.random(11)
        model = StubModel({float(i): float(v) for i, v in enumerate(values)})
        pot = PredictorPotential(model, GOAL_OBS, cfg, episode=episode % 90)
        observations = [obs_for(float(i)) for i in range(11)]
        potentials = [pot.potential(o) for o in observations]
        bonuses = [
            pot.shape(observations[t], observations[t + 1]) for t in range(10)
        ]
        assert telescoping_residual(potentials, bonuses, cfg.gamma) < 1e-5


# -------------------------------------------- tabular policy invariance


def value_iteration(n, rewards, transitions, gamma=0.9, iters=2000):
    """Q iteration on a deterministic tabular MDP; returns (n, A) Q-values."""
    n_actions = transitions.shape[1]
    q = np.zeros((n, n_actions))
    for _ in range(iters):
        v = q.max(axis=1)
        q_new = rewards + gamma * v[transitions]
        if np.max(np.abs(q_new - q)) < 1e-12:
            q = q_new
            break
        q = q_new
    return q


def test_tabular_policy_invariance_under_shaping():
    """4x4 deterministic gridworld: shaping with any potential leaves the
    greedy policy unchanged at every state."""
    width = 4
    n = width * width
    goal = n - 1
    moves = [(0, -1), (1, 0), (0, 1), (-1, 0)]
    transitions = np.zeros((n, 4), dtype=int)
    rewards = np.zeros((n, 4))
    for s in range(n):
        x, y = s % width, s // width
        for a, (dx, dy) in enumerate(moves):
            nx, ny = x + dx, y + dy
            ns = s if not (0 <= nx < width and 0 <= ny < width) else ny * width + nx
            if s == goal:
                ns = s  # absorbing
            transitions[s, a] = ns
            rewards[s, a] = 1.0 if (ns == goal and s != goal) else 0.0

    gamma = 0.9
    phi = np.random.default_rng(1).random(n)
    shaped = rewards + gamma * phi[transitions] - phi[:, None]

    q = value_iteration(n, rewards, transitions, gamma)
    q_shaped = value_iteration(n, shaped, transitions, gamma)

    for s in range(n):
        greedy = np.flatnonzero(q[s] >= q[s].max() - 1e-9)
        greedy_shaped = np.flatnonzero(q_shaped[s] >= q_shaped[s].max() - 1e-9)
        assert np.array_equal(greedy, greedy_shaped)
