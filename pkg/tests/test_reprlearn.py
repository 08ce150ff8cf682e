import numpy as np
import pytest

from rewardrep.dataset import Buffer, smooth_rewards
from rewardrep.gridworld import TwoRoomEnv
from rewardrep.gridworld.env import TWO_ROOM_GOALS
from rewardrep.reprlearn import (
    ReprModel,
    TrainConfig,
    heatmap,
    mse_loss,
    train,
    weights_hash,
)
from tests.test_dataset import make_episode


def small_dataset(n_episodes=4, length=8, reward=1.0):
    eps = []
    for e in range(n_episodes):
        eps += make_episode(length, reward, episode_id=e, start_seed=1000 * e)
    return smooth_rewards(Buffer(eps), gamma=0.99, horizon=64)


# ------------------------------------------------------------------ model


def test_encode_feature_vector():
    model = ReprModel(seed=0)
    obs = np.random.default_rng(0).random((28, 28, 3)).astype(np.float32)
    f = model.encode(obs)
    assert f.shape == (16,)
    assert np.array_equal(f, model.encode(obs))  # deterministic
    other = np.random.default_rng(1).random((28, 28, 3)).astype(np.float32)
    assert not np.array_equal(f, model.encode(other))


def test_prediction_in_unit_interval():
    model = ReprModel(seed=1)
    rng = np.random.default_rng(1)
    p = model.predict_reward(
        rng.random((10, 28, 28, 3)).astype(np.float32),
        rng.random((10, 28, 28, 3)).astype(np.float32),
    )
    assert np.all(p > 0.0) and np.all(p < 1.0)


def test_loss_matches_hand_computation():
    model = ReprModel(seed=2)
    ds = small_dataset(n_episodes=1, length=3)
    x = np.stack([t.next_obs for t in ds.transitions]).astype(np.float32)
    g = np.stack([t.goal_obs for t in ds.transitions]).astype(np.float32)
    p = model.predict_reward(x, g)
    expected = float(np.mean((p - ds.r_star) ** 2))
    assert mse_loss(model, x, g, ds.r_star.astype(np.float32)) == pytest.approx(
        expected, abs=1e-6
    )


# --------------------------------------------------------------- training


def test_overfit_single_batch():
    ds = small_dataset(n_episodes=2, length=16)  # 32 transitions
    model = ReprModel(seed=3)
    cfg = TrainConfig(epochs=500, patience=500, val_fraction=0.0, batch_size=32, seed=3)
    history = train(model, ds, cfg)
    assert history[-1]["train_mse"] < 1e-3
    assert len(history) <= 500


def test_constant_zero_targets_converge():
    ds = small_dataset(n_episodes=3, length=8, reward=0.0)
    assert not ds.r_star.any()
    model = ReprModel(seed=4)
    history = train(model, ds, TrainConfig(epochs=60, patience=60, seed=4))
    assert history[-1]["train_mse"] < 0.01


def test_training_loss_decreases():
    ds = small_dataset()
    model = ReprModel(seed=5)
    history = train(model, ds, TrainConfig(epochs=15, seed=5))
    assert history[-1]["train_mse"] < history[0]["train_mse"]


def test_empty_dataset_rejected():
    from rewardrep.dataset import SmoothedDataset

    empty = SmoothedDataset([], np.zeros(0), 0.99, 64)
    with pytest.raises(ValueError):
        train(ReprModel(), empty)


def test_untied_goal_encoder_trains():
    ds = small_dataset(n_episodes=2, length=6)
    model = ReprModel(seed=6, tied=False)
    assert model.goal_encoder is not None
    history = train(model, ds, TrainConfig(epochs=3, seed=6, tied=False))
    assert len(history) == 3


# ------------------------------------------------------------- persistence


def test_save_load_prediction_equality(tmp_path):
    ds = small_dataset(n_episodes=2, length=6)
    model = ReprModel(seed=7)
    train(model, ds, TrainConfig(epochs=2, seed=7))
    model.save(tmp_path / "m")
    loaded = ReprModel.load(tmp_path / "m")
    assert weights_hash(loaded.encoder) == weights_hash(model.encoder)
    rng = np.random.default_rng(7)
    x = rng.random((100, 28, 28, 3)).astype(np.float32)
    g = rng.random((100, 28, 28, 3)).astype(np.float32)
    assert np.array_equal(model.predict_reward(x, g), loaded.predict_reward(x, g))


# ---------------------------------------------------------------- heatmaps


def test_untrained_heatmap_nearly_flat():
    env = TwoRoomEnv(seed=0, goal="train0")
    state, _, _ = env.reset()
    values = heatmap(ReprModel(seed=8), state.grid)
    assert values.shape == (state.grid.height, state.grid.width)
    finite = values[np.isfinite(values)]
    assert finite.max() - finite.min() < 0.2


def test_heatmap_nan_off_walkable_tiles():
    env = TwoRoomEnv(seed=0, goal="train1")
    state, _, _ = env.reset()
    values = heatmap(ReprModel(seed=9), state.grid)
    assert np.isnan(values[0, 0])  # wall
    gx, gy = TWO_ROOM_GOALS["train1"]
    # the goal tile is walkable-into (the terminal transition lands on it)
    assert np.isfinite(values[gy, gx])
    sx, sy = state.grid.start
    assert np.isfinite(values[sy, sx])
