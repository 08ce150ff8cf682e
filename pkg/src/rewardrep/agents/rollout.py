"""Synchronous rollout collection with optional per-episode shaping."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from rewardrep.agents.gae import compute_gae, normalize
from rewardrep.agents.policy import act
from rewardrep.shaping import PredictorPotential


@dataclass
class RolloutBatch:
    feats: np.ndarray  # (T, 32)
    obs: np.ndarray  # (T, 28, 28, 3) raw views, for trainable encoders
    goal_obs: np.ndarray
    actions: np.ndarray
    log_probs: np.ndarray
    rewards: np.ndarray  # environment reward + shaping bonus
    values: np.ndarray
    dones: np.ndarray
    advantages: np.ndarray = field(default=None)
    returns: np.ndarray = field(default=None)
    episodes_finished: int = 0
    env_reward_sum: float = 0.0


class RolloutWorker:
    """Keeps an environment and its episode state alive across rollouts."""

    def __init__(self, env, learner, rng, shaping_config=None, shaping_model=None):
        self.env = env
        self.learner = learner
        self.rng = rng
        self.shaping_config = shaping_config
        self.shaping_model = shaping_model
        self.episode_index = 0
        self._begin_episode()

    def _begin_episode(self):
        _, self.obs, self.goal_obs = self.env.reset()
        self.potential = None
        if self.shaping_config is not None and self.shaping_config.mode == "predictor":
            self.potential = PredictorPotential(
                self.shaping_model, self.goal_obs, self.shaping_config, self.episode_index
            )

    def collect(self, n_steps, gamma, lam) -> RolloutBatch:
        path, value_net = self.learner.path, self.learner.value_net
        feats_l, obs_l, goal_l = [], [], []
        actions, logps, rewards, values, dones = [], [], [], [], []
        bootstrap = np.zeros(n_steps)
        episodes_finished = 0
        env_reward_sum = 0.0

        for t in range(n_steps):
            feats = path.features(self.obs, self.goal_obs)
            action, logp, value = act(path, value_net, feats, self.rng)
            prev_obs = self.obs
            outcome = self.env.step(action)

            reward = outcome.reward
            env_reward_sum += outcome.reward
            if self.potential is not None:
                reward += self.potential.shape(prev_obs, outcome.observation)

            feats_l.append(feats)
            obs_l.append(prev_obs)
            goal_l.append(self.goal_obs)
            actions.append(action)
            logps.append(logp)
            rewards.append(reward)
            values.append(value)
            dones.append(outcome.done)

            if outcome.done:
                if outcome.truth.timeout:
                    nf = path.features(outcome.observation, self.goal_obs)
                    bootstrap[t] = float(value_net.forward(nf[None])[0, 0])
                episodes_finished += 1
                self.episode_index += 1
                self._begin_episode()
            else:
                self.obs = outcome.observation

        # fill successor values inside the rollout and at the tail
        values_arr = np.array(values)
        for t in range(n_steps - 1):
            if not dones[t]:
                bootstrap[t] = values_arr[t + 1]
        if not dones[-1]:
            nf = path.features(self.obs, self.goal_obs)
            bootstrap[-1] = float(value_net.forward(nf[None])[0, 0])

        adv, rets = compute_gae(rewards, values_arr, bootstrap, dones, gamma, lam)
        return RolloutBatch(
            feats=np.stack(feats_l).astype(np.float32),
            obs=np.stack(obs_l),
            goal_obs=np.stack(goal_l),
            actions=np.array(actions),
            log_probs=np.array(logps),
            rewards=np.array(rewards),
            values=values_arr,
            dones=np.array(dones, dtype=bool),
            advantages=normalize(adv),
            returns=rets,
            episodes_finished=episodes_finished,
            env_reward_sum=env_reward_sum,
        )


def collect_rollout(env, learner, n_steps, rng, gamma=0.99, lam=0.95,
                    shaping_config=None, shaping_model=None) -> RolloutBatch:
    worker = RolloutWorker(env, learner, rng, shaping_config, shaping_model)
    return worker.collect(n_steps, gamma, lam)
