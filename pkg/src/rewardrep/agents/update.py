"""PPO-clip and advantage actor-critic updates.

Gradients of the surrogate objectives are taken analytically with respect
to the policy logits and value outputs, then pushed through the networks'
backward passes. PPO uses a clipped value loss, an entropy bonus, and
global gradient-norm clipping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from rewardrep.agents.policy import log_softmax, softmax
from rewardrep.nncore import Adam


@dataclass
class PPOConfig:
    clip_eps: float = 0.2
    epochs: int = 4
    minibatch_size: int = 32
    lr: float = 5e-4
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    max_grad_norm: float = 0.5
    gamma: float = 0.99
    lam: float = 0.95
    n_steps: int = 128


class UpdateError(RuntimeError):
    pass


def _onehot(actions, n):
    out = np.zeros((len(actions), n), dtype=np.float64)
    out[np.arange(len(actions)), actions] = 1.0
    return out


def _policy_logit_grad(logits, actions, old_logp, advantages, clip_eps, entropy_coef):
    """d(policy loss - entropy bonus)/dlogits, plus loss value and stats."""
    n, k = logits.shape
    logp_all = log_softmax(logits)
    probs = softmax(logits)
    logp = logp_all[np.arange(n), actions]
    ratio = np.exp(logp - old_logp)
    surr1 = ratio * advantages
    clipped = np.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps)
    surr2 = clipped * advantages
    policy_loss = -float(np.mean(np.minimum(surr1, surr2)))
    # gradient flows only where the unclipped branch is active
    active = surr1 <= surr2
    dlogp = np.where(active, -ratio * advantages, 0.0) / n
    glogits = dlogp[:, None] * (_onehot(actions, k) - probs)

    entropy = -np.sum(probs * logp_all, axis=1)
    # d(-c * mean(H))/dlogits
    glogits += entropy_coef / n * probs * (logp_all + entropy[:, None])

    stats = {
        "policy_loss": policy_loss,
        "entropy": float(np.mean(entropy)),
        "clip_fraction": float(np.mean(np.abs(ratio - 1.0) > clip_eps)),
        "approx_kl": float(np.mean(old_logp - logp)),
    }
    return glogits, policy_loss - entropy_coef * float(np.mean(entropy)), stats


def _value_grad(v, v_old, returns, clip_eps, value_coef):
    """Clipped value regression: 0.5 * mean(max((v-R)^2, (v_clip-R)^2))."""
    v_clip = v_old + np.clip(v - v_old, -clip_eps, clip_eps)
    sq1 = (v - returns) ** 2
    sq2 = (v_clip - returns) ** 2
    loss = 0.5 * float(np.mean(np.maximum(sq1, sq2)))
    inside = np.abs(v - v_old) <= clip_eps
    gv = np.where(sq1 >= sq2, v - returns, np.where(inside, v_clip - returns, 0.0))
    gv = value_coef * gv / len(v)
    return gv, loss


def _clip_grad_norm(grad_lists, max_norm):
    total = 0.0
    for grads in grad_lists:
        for d in grads:
            for g in d.values():
                total += float(np.sum(np.asarray(g, dtype=np.float64) ** 2))
    norm = np.sqrt(total)
    if max_norm is not None and norm > max_norm and norm > 0:
        scale = max_norm / norm
        for grads in grad_lists:
            for d in grads:
                for k in d:
                    d[k] = d[k] * scale
    return norm


class AgentOptimizer:
    """One Adam instance over the policy path plus the value head."""

    def __init__(self, learner, lr):
        self.learner = learner
        self.params = learner.path.trainable_params() + list(learner.value_net.params)
        self.opt = Adam(lr=lr)

    def step(self, path_grads, value_grads):
        self.opt.step(self.params, path_grads + value_grads)


def ppo_update(learner, batch, cfg: PPOConfig, optimizer: AgentOptimizer | None = None):
    """Clipped-surrogate PPO over `cfg.epochs` passes of shuffled minibatches."""
    opt = optimizer or AgentOptimizer(learner, cfg.lr)
    n = len(batch.actions)
    rng = np.random.default_rng(opt.opt.steps)
    stats = {}
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.minibatch_size):
            idx = order[start : start + cfg.minibatch_size]
            stats = _ppo_minibatch(learner, batch, idx, cfg, opt)
    return stats


def _ppo_minibatch(learner, batch, idx, cfg, opt):
    path, value_net = learner.path, learner.value_net
    logits, cache = path.forward_cached(
        batch.feats[idx], batch.obs[idx], batch.goal_obs[idx]
    )
    if not np.all(np.isfinite(logits)):
        raise UpdateError("non-finite logits during PPO update")
    glogits, ploss, stats = _policy_logit_grad(
        logits,
        batch.actions[idx],
        batch.log_probs[idx],
        batch.advantages[idx],
        cfg.clip_eps,
        cfg.entropy_coef,
    )
    path_grads = path.backward(cache, glogits.astype(np.float32))

    v, vcache = value_net.forward_cached(batch.feats[idx])
    gv, vloss = _value_grad(
        v[:, 0], batch.values[idx], batch.returns[idx], cfg.clip_eps, cfg.value_coef
    )
    _, value_grads = value_net.backward(vcache, gv.astype(np.float32)[:, None])

    if not np.isfinite(ploss) or not np.isfinite(vloss):
        raise UpdateError(f"NaN loss (policy={ploss}, value={vloss})")
    grad_norm = _clip_grad_norm([path_grads, value_grads], cfg.max_grad_norm)
    opt.step(path_grads, value_grads)
    stats.update({"value_loss": vloss, "grad_norm": float(grad_norm)})
    return stats


def a2c_update(learner, batch, cfg: PPOConfig, optimizer: AgentOptimizer | None = None):
    """Single synchronous actor-critic step on the whole batch."""
    opt = optimizer or AgentOptimizer(learner, cfg.lr)
    path, value_net = learner.path, learner.value_net
    logits, cache = path.forward_cached(batch.feats, batch.obs, batch.goal_obs)
    if not np.all(np.isfinite(logits)):
        raise UpdateError("non-finite logits during A2C update")

    n, k = logits.shape
    logp_all = log_softmax(logits)
    probs = softmax(logits)
    logp = logp_all[np.arange(n), batch.actions]
    adv = batch.advantages
    policy_loss = -float(np.mean(logp * adv))
    glogits = (-adv / n)[:, None] * (_onehot(batch.actions, k) - probs)
    entropy = -np.sum(probs * logp_all, axis=1)
    glogits += cfg.entropy_coef / n * probs * (logp_all + entropy[:, None])
    path_grads = path.backward(cache, glogits.astype(np.float32))

    v, vcache = value_net.forward_cached(batch.feats)
    err = v[:, 0] - batch.returns
    value_loss = 0.5 * float(np.mean(err**2))
    gv = cfg.value_coef * err / n
    _, value_grads = value_net.backward(vcache, gv.astype(np.float32)[:, None])

    if not np.isfinite(policy_loss) or not np.isfinite(value_loss):
        raise UpdateError(f"NaN loss (policy={policy_loss}, value={value_loss})")
    grad_norm = _clip_grad_norm([path_grads, value_grads], cfg.max_grad_norm)
    opt.step(path_grads, value_grads)
    return {
        "policy_loss": policy_loss,
        "value_loss": value_loss,
        "entropy": float(np.mean(entropy)),
        "grad_norm": float(grad_norm),
    }
