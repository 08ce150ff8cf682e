"""Successor-feature baseline.

Two-phase fit on a random-policy buffer: (1) reward regression
r_t ~ w . phi(s_{t+1}) trains the encoder and the weight vector jointly;
(2) TD fitting of the per-action successor map psi with phi frozen, where
psi(s, a) targets phi(s') + gamma * mean_a' psi(s', a') (uniform policy).
psi is linear in the features, mirroring the successor-matrix structure,
and is fit by iterated least squares.
"""

from __future__ import annotations

import numpy as np

from rewardrep.architectures import FEATURE_DIM, N_ACTIONS, encoder_net
from rewardrep.nncore import Adam, Dense, Network


class SFModel:
    def __init__(self, encoder: Network, w: np.ndarray, psi: np.ndarray):
        self.encoder = encoder
        self.w = w  # (F,) reward weights
        self.psi = psi  # (A, F, F): psi(s, a) = psi[a] @ phi(s)

    def features(self, obs: np.ndarray) -> np.ndarray:
        obs = np.asarray(obs, dtype=np.float32)
        single = obs.ndim == 3
        if single:
            obs = obs[None]
        f = self.encoder.forward(obs)
        return f[0] if single else f

    def successor(self, phi: np.ndarray, action: int) -> np.ndarray:
        return self.psi[action] @ phi

    def value(self, phi: np.ndarray, action: int) -> float:
        """w . psi(s, a), the feature-factored action value."""
        return float(self.w @ self.successor(phi, action))


def fit_successor_lstsq(phi_s, actions, phi_next, dones, gamma, n_actions=N_ACTIONS,
                        iterations=3000, tol=1e-10):
    """Iterated least-squares TD fit of the linear successor map.

    Returns psi of shape (A, F, F). Terminal transitions do not bootstrap.
    """
    phi_s = np.asarray(phi_s, dtype=np.float64)
    phi_next = np.asarray(phi_next, dtype=np.float64)
    actions = np.asarray(actions)
    cont = 1.0 - np.asarray(dones, dtype=np.float64)
    f = phi_s.shape[1]
    psi = np.zeros((n_actions, f, f))
    pinv = [np.linalg.pinv(phi_s[actions == a]) for a in range(n_actions)]
    for _ in range(iterations):
        mean_next = phi_next @ np.mean(psi, axis=0).T  # (N, F)
        targets = phi_next + gamma * cont[:, None] * mean_next
        new_psi = np.stack(
            [(pinv[a] @ targets[actions == a]).T for a in range(n_actions)]
        )
        delta = float(np.max(np.abs(new_psi - psi)))
        psi = new_psi
        if delta < tol:
            break
    return psi


def closed_form_successor(transition_matrices, features, gamma):
    """Oracle for tabular MDPs: per-action expected discounted successor
    features under the uniform policy.

    psi(s, a) = sum_s' P_a[s, s'] * [(I - gamma P_pi)^-1 Phi](s'), i.e. the
    one-step transition applied to the closed-form successor matrix.
    """
    p_list = [np.asarray(p, dtype=np.float64) for p in transition_matrices]
    phi = np.asarray(features, dtype=np.float64)
    p_pi = np.mean(p_list, axis=0)
    occupancy = np.linalg.solve(np.eye(len(phi)) - gamma * p_pi, phi)
    return np.stack([p @ occupancy for p in p_list])  # (A, S, F)


def sf_pretrain(buffer, gamma=0.99, seed=0, epochs=10, batch_size=64, lr=1e-3,
                oversample=10) -> SFModel:
    """Fits the SF preprocessor on a random-policy buffer."""
    if len(buffer) == 0:
        raise ValueError("buffer is empty")
    encoder = encoder_net(seed=seed)
    head = Network([Dense(1)], (FEATURE_DIM,), seed=seed + 1)

    next_obs = np.stack([t.next_obs for t in buffer]).astype(np.float32)
    rewards = np.array([t.reward for t in buffer], dtype=np.float32)
    dones = np.array([t.done for t in buffer])
    actions = np.array([t.action for t in buffer])

    # balance the sparse positives, mirroring the predictor pipeline
    idx = np.concatenate(
        [np.arange(len(buffer))]
        + [np.nonzero(rewards > 0)[0]] * max(0, oversample - 1)
    )
    rng = np.random.default_rng(seed)

    params = list(encoder.params) + list(head.params)
    opt = Adam(lr=lr)
    for _ in range(epochs):
        order = rng.permutation(len(idx))
        for start in range(0, len(order), batch_size):
            b = idx[order[start : start + batch_size]]
            f, cf = encoder.forward_cached(next_obs[b])
            p, cp = head.forward_cached(f)
            err = p[:, 0] - rewards[b]
            gp = (2.0 * err / len(b)).astype(np.float32)[:, None]
            gf, ghead = head.backward(cp, gp)
            _, genc = encoder.backward(cf, gf)
            opt.step(params, genc + ghead)

    # phase 2: psi with the encoder frozen
    obs = np.stack([t.obs for t in buffer]).astype(np.float32)
    phi_s = _batched_forward(encoder, obs)
    phi_next = _batched_forward(encoder, next_obs)
    psi = fit_successor_lstsq(phi_s, actions, phi_next, dones, gamma, iterations=1000)
    w = head.params[0]["w"][:, 0].astype(np.float64)
    return SFModel(encoder, w, psi)


def _batched_forward(net, x, batch_size=512):
    return np.concatenate(
        [net.forward(x[i : i + batch_size]) for i in range(0, len(x), batch_size)]
    )
