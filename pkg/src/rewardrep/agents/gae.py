"""Generalized advantage estimation over fixed-length rollouts.

Bootstrapping is suppressed at true terminals (goal, lava) and allowed at
timeouts; the recursion resets at every episode boundary either way.
"""

from __future__ import annotations

import numpy as np


def compute_gae(rewards, values, bootstrap_values, dones, gamma, lam):
    """Returns (advantages, returns), both 1-D float64.

    bootstrap_values[t] is V of the successor state: the next step's value
    inside the rollout, V(next_obs) at a timeout, 0 at a true terminal, and
    V(last_obs) at the rollout tail. dones[t] marks any episode end and
    stops the recursion.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    bootstrap_values = np.asarray(bootstrap_values, dtype=np.float64)
    dones = np.asarray(dones, dtype=bool)
    n = len(rewards)
    adv = np.zeros(n)
    lastgaelam = 0.0
    for t in reversed(range(n)):
        delta = rewards[t] + gamma * bootstrap_values[t] - values[t]
        lastgaelam = delta + gamma * lam * (0.0 if dones[t] else 1.0) * lastgaelam
        adv[t] = lastgaelam
    return adv, adv + values


def normalize(adv: np.ndarray) -> np.ndarray:
    """Per-batch advantage normalization."""
    std = adv.std()
    return (adv - adv.mean()) / (std + 1e-8)
