"""Joint training of the visual encoder and the reward predictor.

One encoder (weights tied by default) maps the current view and the goal
view to 16-dim features; the predictor regresses the smoothed target r*_t
from the concatenated 32-dim pair via squared error. Targets pair r*_t with
the NEXT observation of each transition.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from rewardrep.architectures import FEATURE_DIM, encoder_net, predictor_net
from rewardrep.dataset import SmoothedDataset, split_by_episode
from rewardrep.gridworld import TileKind, goal_observation
from rewardrep.gridworld.render import render_window
from rewardrep.nncore import Adam, Network, load_weights, save_weights


@dataclass
class TrainConfig:
    lr: float = 1e-3
    batch_size: int = 64
    epochs: int = 50
    patience: int = 10
    val_fraction: float = 0.1
    oversample: int = 10  # duplication factor for positive-target transitions
    # Minimum fraction of positive-target samples per minibatch. With very
    # sparse positives (raw rewards), the logistic output otherwise saturates
    # on the all-zero solution and gradients vanish before the positives are
    # ever fit. Stratification only engages when the training split is less
    # positive than this; otherwise plain shuffled minibatches are used.
    min_positive_fraction: float = 0.25
    seed: int = 0
    tied: bool = True  # one encoder applied to both views


def weights_hash(net: Network) -> str:
    h = hashlib.sha256()
    for key, arr in net.param_items():
        h.update(key.encode())
        h.update(np.ascontiguousarray(arr, dtype=np.float32).tobytes())
    return h.hexdigest()


class ReprModel:
    def __init__(self, seed: int = 0, tied: bool = True, meta: dict | None = None):
        self.encoder = encoder_net(seed=seed)
        self.goal_encoder = None if tied else encoder_net(seed=seed + 1)
        self.predictor = predictor_net(seed=seed + 2)
        self.meta = dict(meta or {})
        self.meta.setdefault("seed", seed)
        self.meta.setdefault("tied", tied)

    @property
    def tied(self) -> bool:
        return self.goal_encoder is None

    def encode(self, obs: np.ndarray) -> np.ndarray:
        """16-dim features; accepts one observation or a batch."""
        obs = np.asarray(obs, dtype=np.float32)
        single = obs.ndim == 3
        if single:
            obs = obs[None]
        feats = self.encoder.forward(obs)
        return feats[0] if single else feats

    def _encode_goal(self, goal_obs: np.ndarray) -> np.ndarray:
        net = self.encoder if self.tied else self.goal_encoder
        return net.forward(goal_obs)

    def predict_reward(self, obs: np.ndarray, goal_obs: np.ndarray) -> np.ndarray | float:
        obs = np.asarray(obs, dtype=np.float32)
        goal_obs = np.asarray(goal_obs, dtype=np.float32)
        single = obs.ndim == 3
        if single:
            obs = obs[None]
        if goal_obs.ndim == 3:
            goal_obs = np.broadcast_to(goal_obs[None], obs.shape)
        z = np.concatenate(
            [self.encoder.forward(obs), self._encode_goal(goal_obs)], axis=1
        )
        p = self.predictor.forward(z)[:, 0]
        return float(p[0]) if single else p

    # -- persistence ----------------------------------------------------

    def save(self, directory) -> None:
        os.makedirs(directory, exist_ok=True)
        save_weights(self.encoder, os.path.join(directory, "encoder.rsnn"))
        if not self.tied:
            save_weights(self.goal_encoder, os.path.join(directory, "goal_encoder.rsnn"))
        save_weights(self.predictor, os.path.join(directory, "predictor.rsnn"))
        with open(os.path.join(directory, "model.json"), "w") as fh:
            json.dump(self.meta, fh, indent=2, sort_keys=True)

    @classmethod
    def load(cls, directory) -> "ReprModel":
        with open(os.path.join(directory, "model.json")) as fh:
            meta = json.load(fh)
        model = cls(seed=meta.get("seed", 0), tied=meta.get("tied", True), meta=meta)
        load_weights(model.encoder, os.path.join(directory, "encoder.rsnn"))
        if not model.tied:
            load_weights(model.goal_encoder, os.path.join(directory, "goal_encoder.rsnn"))
        load_weights(model.predictor, os.path.join(directory, "predictor.rsnn"))
        return model


def _stack(ds: SmoothedDataset):
    x = np.stack([t.next_obs for t in ds.transitions]).astype(np.float32)
    g = np.stack([t.goal_obs for t in ds.transitions]).astype(np.float32)
    y = ds.r_star.astype(np.float32)
    return x, g, y


def mse_loss(model: ReprModel, x, g, y, batch_size=256) -> float:
    total = 0.0
    for i in range(0, len(y), batch_size):
        p = model.predict_reward(x[i : i + batch_size], g[i : i + batch_size])
        total += float(np.sum((p - y[i : i + batch_size]) ** 2))
    return total / len(y)


def train(model: ReprModel, ds: SmoothedDataset, config: TrainConfig | None = None):
    """Minimizes the squared prediction error jointly over encoder and
    predictor parameters. Returns a per-epoch loss history; early-stops on
    validation MSE and restores the best parameters.
    """
    if len(ds) == 0:
        raise ValueError("dataset is empty")
    cfg = config or TrainConfig()
    x, g, y = _stack(ds)
    train_idx, val_idx = split_by_episode(ds, cfg.val_fraction, cfg.seed)
    if len(val_idx) == 0:
        train_idx = np.arange(len(y), dtype=np.intp)
    # Oversample positives on the training split only, so the validation
    # MSE stays an unweighted estimate of prediction error.
    if cfg.oversample > 1:
        pos = train_idx[y[train_idx] > 0]
        if len(pos):
            train_idx = np.concatenate(
                [train_idx] + [pos] * (cfg.oversample - 1)
            ).astype(np.intp)

    nets = [model.encoder, model.predictor]
    if not model.tied:
        nets.insert(1, model.goal_encoder)
    all_params = [d for net in nets for d in net.params]
    opt = Adam(lr=cfg.lr)
    rng = np.random.default_rng(cfg.seed)

    pos_train = train_idx[y[train_idx] > 0]
    neg_train = train_idx[y[train_idx] <= 0]
    pos_frac = len(pos_train) / max(len(train_idx), 1)
    stratify = 0 < pos_frac < cfg.min_positive_fraction and len(neg_train) > 0
    n_pos_per_batch = max(1, int(round(cfg.batch_size * cfg.min_positive_fraction)))

    history = []
    best_val = np.inf
    best_params = None
    stale = 0
    for epoch in range(cfg.epochs):
        if stratify:
            neg_bs = max(1, cfg.batch_size - n_pos_per_batch)
            neg_order = neg_train[rng.permutation(len(neg_train))]
            batches = [
                np.concatenate(
                    [
                        neg_order[start : start + neg_bs],
                        rng.choice(pos_train, size=n_pos_per_batch, replace=True),
                    ]
                )
                for start in range(0, len(neg_order), neg_bs)
            ]
        else:
            order = rng.permutation(len(train_idx))
            batches = [
                train_idx[order[start : start + cfg.batch_size]]
                for start in range(0, len(order), cfg.batch_size)
            ]
        epoch_loss = 0.0
        n_seen = 0
        for idx in batches:
            loss, grads = _loss_and_grads(model, x[idx], g[idx], y[idx])
            epoch_loss += loss * len(idx)
            n_seen += len(idx)
            opt.step(all_params, grads)
        train_mse = epoch_loss / n_seen
        if len(val_idx):
            val_mse = mse_loss(model, x[val_idx], g[val_idx], y[val_idx])
            vp = val_idx[y[val_idx] > 0]
            vn = val_idx[y[val_idx] <= 0]
            if len(vp) or len(pos_train):
                # Score validation under the same positive weighting the
                # training minibatches use. Positives are rare and small,
                # so under the plain MSE the all-zero predictor often looks
                # best and early stopping would undo the fit of the
                # positive targets.
                if stratify:
                    w = n_pos_per_batch / cfg.batch_size
                else:
                    w = len(pos_train) / max(len(train_idx), 1)
                obj_n = mse_loss(model, x[vn], g[vn], y[vn]) if len(vn) else 0.0
                if len(vp):
                    obj_p = mse_loss(model, x[vp], g[vp], y[vp])
                else:
                    # No positive episode landed in the validation split;
                    # fall back to the (deduplicated) training positives so
                    # the stopping metric still sees the positive fit.
                    up = np.unique(pos_train)
                    obj_p = mse_loss(model, x[up], g[up], y[up])
                val_objective = (1.0 - w) * obj_n + w * obj_p
            else:
                val_objective = val_mse
        else:
            val_mse = train_mse
            val_objective = train_mse
        history.append(
            {
                "epoch": epoch,
                "train_mse": train_mse,
                "val_mse": val_mse,
                "val_objective": val_objective,
            }
        )
        if val_objective < best_val - 1e-8:
            best_val = val_objective
            best_params = [
                {k: v.copy() for k, v in d.items()} for d in all_params
            ]
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                break
    if best_params is not None:
        for d, b in zip(all_params, best_params):
            for k in d:
                d[k] = b[k]
    model.meta.update(
        {
            "epochs_run": len(history),
            "best_val_objective": best_val,
            "best_val_mse": min(h["val_mse"] for h in history),
            **asdict(cfg),
        }
    )
    return history


def _loss_and_grads(model: ReprModel, xb, gb, yb):
    enc = model.encoder
    genc = model.goal_encoder if not model.tied else enc
    fo, co = enc.forward_cached(xb)
    fg, cg = genc.forward_cached(gb)
    z = np.concatenate([fo, fg], axis=1)
    p, cp = model.predictor.forward_cached(z)
    err = p[:, 0] - yb
    loss = float(np.mean(err**2))
    gp = (2.0 * err / len(yb)).astype(np.float32)[:, None]
    gz, gpred = model.predictor.backward(cp, gp)
    _, g_obs = enc.backward(co, gz[:, :FEATURE_DIM])
    _, g_goal = genc.backward(cg, gz[:, FEATURE_DIM:])
    if model.tied:
        g_enc = [
            {k: a[k] + b[k] for k in a} for a, b in zip(g_obs, g_goal)
        ]
        grads = g_enc + gpred
    else:
        grads = g_obs + g_goal + gpred
    return loss, grads


def heatmap(model: ReprModel, grid) -> np.ndarray:
    """Mean predicted reward over the 4 poses at each walkable tile.

    Walkable means Empty tiles plus the goal tile itself: the map shows the
    predicted reward for transitioning onto a tile, and the terminal
    transition lands on the goal. Returns a (height, width) float array
    with NaN on Wall/Lava tiles.
    """
    goal_obs = goal_observation(grid)
    out = np.full((grid.height, grid.width), np.nan)
    cells = list(grid.empty_cells())
    if grid.goal is not None:
        cells.append(tuple(grid.goal))
    views = np.stack(
        [render_window(grid, x, y, d) for (x, y) in cells for d in range(4)]
    )
    preds = model.predict_reward(views, np.broadcast_to(goal_obs[None], views.shape))
    preds = preds.reshape(len(cells), 4).mean(axis=1)
    for (x, y), v in zip(cells, preds):
        out[y, x] = v
    return out
