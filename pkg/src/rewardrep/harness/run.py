"""Training loop, evaluation rollouts, and trajectory dumps.

Evaluation always runs without shaping (shaping is a training-only reward
augmentation) on an environment seeded disjointly from training, and never
advances the training step counter.
"""

from __future__ import annotations

import os

import numpy as np

import rewardrep
from rewardrep.agents import (
    PPOConfig,
    a2c_update,
    build_variant,
    ppo_update,
    sf_pretrain,
)
from rewardrep.agents.policy import act
from rewardrep.agents.rollout import RolloutWorker
from rewardrep.agents.update import AgentOptimizer
from rewardrep.dataset import load_buffer
from rewardrep.gridworld import make_env
from rewardrep.harness.config import ConfigError, ExperimentConfig, manifest_text
from rewardrep.nncore import save_weights
from rewardrep.reprlearn import ReprModel
from rewardrep.shaping import ShapingConfig

_EVAL_SEED_OFFSET = 777_000_001

METRIC_COLUMNS = (
    "step",
    "mean_reward",
    "mean_episode_len",
    "min_episode_len",
    "policy_loss",
    "value_loss",
    "entropy",
    "clip_fraction",
)


def _env_kwargs(cfg: ExperimentConfig) -> dict:
    return {"goal": cfg.env_goal} if cfg.env == "two-room" else {}


def build_learner(cfg: ExperimentConfig, seed: int):
    repr1 = ReprModel.load(cfg.repr1) if cfg.repr1 else None
    repr64 = ReprModel.load(cfg.repr64) if cfg.repr64 else None
    sf_model = None
    if cfg.variant.lower() in ("sf",):
        if not cfg.buffer:
            raise ConfigError("variant 'sf' needs models.buffer for SF pretraining")
        sf_model = sf_pretrain(load_buffer(cfg.buffer), gamma=cfg.gamma, seed=seed)
    shaping = ShapingConfig(
        mode=cfg.shaping_mode,
        gamma=cfg.shaping_gamma,
        horizon=cfg.shaping_h,
        delta=cfg.shaping_delta,
        antigoals=list(cfg.shaping_antigoals),
    )
    return build_variant(
        cfg.variant,
        seed=seed,
        repr_model=repr1,
        repr_model_64=repr64,
        sf_model=sf_model,
        shaping_config=shaping,
    )


def evaluate(learner, env_kind, n_rollouts, seed, greedy=False, env_kwargs=None,
             policy=None):
    """Mean reward and episode-length stats over fresh unshaped rollouts.

    `policy`, if given, is a callable (state, obs, goal_obs, rng) -> action
    scripting the behaviour instead of the learner (used by test oracles).
    """
    if n_rollouts <= 0:
        raise ValueError("n_rollouts must be positive")
    env = make_env(env_kind, seed=seed, **(env_kwargs or {}))
    rng = np.random.default_rng(seed)
    rewards, lengths = [], []
    for _ in range(n_rollouts):
        _, obs, goal_obs = env.reset()
        total = 0.0
        while True:
            if policy is not None:
                action = policy(env.state, obs, goal_obs, rng)
            else:
                feats = learner.path.features(obs, goal_obs)
                action, _, _ = act(
                    learner.path, learner.value_net, feats, rng, greedy=greedy
                )
            outcome = env.step(action)
            total += outcome.reward
            if outcome.done:
                lengths.append(outcome.truth.steps)
                break
            obs = outcome.observation
        rewards.append(total)
    return {
        "mean_reward": float(np.mean(rewards)),
        "mean_episode_len": float(np.mean(lengths)),
        "min_episode_len": int(np.min(lengths)),
    }


def _format_row(values) -> str:
    cells = []
    for v in values:
        if isinstance(v, float):
            cells.append(format(v, ".10g"))
        else:
            cells.append(str(v))
    return ",".join(cells)


def train_single_run(cfg: ExperimentConfig, seed: int, run_dir, progress=None):
    """One seed's training run; writes metrics.csv, checkpoints/, manifest.txt."""
    os.makedirs(os.path.join(run_dir, "checkpoints"), exist_ok=True)
    with open(os.path.join(run_dir, "manifest.txt"), "w") as fh:
        fh.write(manifest_text(cfg, seed, rewardrep.__version__))

    learner = build_learner(cfg, seed)
    env = make_env(cfg.env, seed=seed, **_env_kwargs(cfg))
    rng = np.random.default_rng(seed + 1)
    ppo_cfg = PPOConfig(
        clip_eps=cfg.clip_eps,
        epochs=cfg.ppo_epochs,
        minibatch_size=cfg.minibatch_size,
        lr=cfg.lr,
        entropy_coef=cfg.entropy_coef,
        value_coef=cfg.value_coef,
        max_grad_norm=cfg.max_grad_norm,
        gamma=cfg.gamma,
        lam=cfg.lam,
        n_steps=cfg.n_steps,
    )
    optimizer = AgentOptimizer(learner, ppo_cfg.lr)
    update = ppo_update if cfg.algo == "ppo" else a2c_update
    if cfg.algo not in ("ppo", "a2c"):
        raise ConfigError(f"unknown algo {cfg.algo!r}")

    worker = RolloutWorker(
        env, learner, rng,
        shaping_config=learner.shaping_config,
        shaping_model=learner.shaping_model,
    )
    rows = []
    steps = 0
    next_eval = cfg.eval_interval
    stats = {}
    while steps < cfg.total_steps:
        batch = worker.collect(ppo_cfg.n_steps, ppo_cfg.gamma, ppo_cfg.lam)
        steps += ppo_cfg.n_steps
        stats = update(learner, batch, ppo_cfg, optimizer)
        if steps >= next_eval or steps >= cfg.total_steps:
            metrics = evaluate(
                learner, cfg.env, cfg.eval_rollouts,
                seed + _EVAL_SEED_OFFSET + steps, env_kwargs=_env_kwargs(cfg),
            )
            rows.append(
                (
                    steps,
                    metrics["mean_reward"],
                    metrics["mean_episode_len"],
                    metrics["min_episode_len"],
                    stats.get("policy_loss", 0.0),
                    stats.get("value_loss", 0.0),
                    stats.get("entropy", 0.0),
                    stats.get("clip_fraction", 0.0),
                )
            )
            if progress is not None:
                progress(seed, steps, metrics)
            while next_eval <= steps:
                next_eval += cfg.eval_interval

    with open(os.path.join(run_dir, "metrics.csv"), "w") as fh:
        fh.write(",".join(METRIC_COLUMNS) + "\n")
        for row in rows:
            fh.write(_format_row(row) + "\n")

    ckpt = os.path.join(run_dir, "checkpoints")
    save_weights(learner.path.policy, os.path.join(ckpt, "policy.rsnn"))
    save_weights(learner.path.encoder, os.path.join(ckpt, "encoder.rsnn"))
    save_weights(learner.value_net, os.path.join(ckpt, "value.rsnn"))
    return learner, rows


def train_agent(cfg: ExperimentConfig, progress=None):
    """Trains every seed in the config; returns {seed: run_dir}."""
    out = {}
    for seed in cfg.seeds:
        run_dir = os.path.join(cfg.out, cfg.name, str(seed))
        train_single_run(cfg, seed, run_dir, progress=progress)
        out[seed] = run_dir
    return out


def trajmap(learner, env_kind, episodes, seed, env_kwargs=None, policy=None):
    """Tile-visit sequences per episode (rotations in place are skipped).

    Returns a list of dicts: {episode, success, tiles: [(x, y), ...]}.
    `policy` has the same scripting role as in evaluate().
    """
    env = make_env(env_kind, seed=seed, **(env_kwargs or {}))
    rng = np.random.default_rng(seed)
    out = []
    for ep in range(episodes):
        state, obs, goal_obs = env.reset()
        tiles = [(state.pose.x, state.pose.y)]
        success = False
        while True:
            if policy is not None:
                action = policy(env.state, obs, goal_obs, rng)
            else:
                feats = learner.path.features(obs, goal_obs)
                action, _, _ = act(learner.path, learner.value_net, feats, rng)
            outcome = env.step(action)
            if outcome.truth.agent != tiles[-1]:
                tiles.append(outcome.truth.agent)
            if outcome.done:
                success = outcome.reward > 0
                break
            obs = outcome.observation
        out.append({"episode": ep, "success": success, "tiles": tiles})
    return out
