"""Policy path: encoder (frozen or trainable) feeding the 32 -> 64 -> 64 -> 3
logit network, plus action sampling."""

from __future__ import annotations

import numpy as np

from rewardrep.architectures import FEATURE_DIM, encoder_net, policy_net
from rewardrep.nncore import Network


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


class PolicyPath:
    """Encoder + policy MLP. One encoder is applied to both the current and
    the goal observation (tied weights); when `trainable_encoder` is false
    the encoder is frozen and updates touch only the policy MLP."""

    def __init__(self, encoder: Network | None = None, trainable_encoder=False, seed=0):
        self.encoder = encoder if encoder is not None else encoder_net(seed=seed)
        self.policy = policy_net(seed=seed + 1)
        self.trainable_encoder = trainable_encoder

    @property
    def param_count(self) -> int:
        return self.encoder.param_count + self.policy.param_count

    def trainable_params(self):
        params = list(self.policy.params)
        if self.trainable_encoder:
            params = list(self.encoder.params) + params
        return params

    def features(self, obs: np.ndarray, goal_obs: np.ndarray) -> np.ndarray:
        """32-dim concatenated features; accepts single observations or batches."""
        obs = np.asarray(obs, dtype=np.float32)
        single = obs.ndim == 3
        if single:
            obs, goal_obs = obs[None], np.asarray(goal_obs, dtype=np.float32)[None]
        f = np.concatenate(
            [self.encoder.forward(obs), self.encoder.forward(goal_obs)], axis=1
        )
        return f[0] if single else f

    def logits(self, feats: np.ndarray) -> np.ndarray:
        return self.policy.forward(feats)

    def forward_cached(self, feats, obs=None, goal_obs=None):
        """Logits plus the cache needed by backward.

        With a trainable encoder the raw observation pair is required and
        features are recomputed through the current encoder weights.
        """
        if self.trainable_encoder:
            if obs is None or goal_obs is None:
                raise ValueError("trainable encoder requires raw observations")
            fo, co = self.encoder.forward_cached(obs)
            fg, cg = self.encoder.forward_cached(goal_obs)
            feats = np.concatenate([fo, fg], axis=1)
            logits, cp = self.policy.forward_cached(feats)
            return logits, (cp, co, cg)
        logits, cp = self.policy.forward_cached(feats)
        return logits, (cp, None, None)

    def backward(self, cache, glogits):
        """Gradients aligned with trainable_params()."""
        cp, co, cg = cache
        gfeats, gpolicy = self.policy.backward(cp, glogits)
        if not self.trainable_encoder:
            return gpolicy
        _, g1 = self.encoder.backward(co, gfeats[:, :FEATURE_DIM])
        _, g2 = self.encoder.backward(cg, gfeats[:, FEATURE_DIM:])
        genc = [{k: a[k] + b[k] for k in a} for a, b in zip(g1, g2)]
        return genc + gpolicy


def act(path: PolicyPath, value_net: Network, feats: np.ndarray, rng, greedy=False):
    """Sample an action from softmax(logits); returns (action, logp, value).

    Deterministic given the rng state; raises on non-finite logits.
    """
    feats = np.asarray(feats, dtype=np.float32)[None]
    logits = path.logits(feats)[0]
    if not np.all(np.isfinite(logits)):
        raise RuntimeError(f"non-finite policy logits: {logits}")
    probs = softmax(logits)
    if greedy:
        action = int(np.argmax(probs))
    else:
        action = int(rng.choice(len(probs), p=probs))
    value = float(value_net.forward(feats)[0, 0])
    return action, float(np.log(probs[action])), value
