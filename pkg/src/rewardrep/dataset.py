"""Random-policy experience collection, reward smoothing, oversampling, and
the "RSBUF1" persistent buffer format.

Smoothing propagates each goal-reaching episode's terminal reward backward:
r*_t = gamma^(T-t) * r_T for 0 <= T-t < M, else 0. Episodes ending by lava
or timeout get r* = 0 throughout, and M = 1 is the identity on rewards.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from rewardrep.gridworld import Action, GridEnv, make_env

MAGIC = b"RSBUF1"
_OBS_SIZE = 28 * 28 * 3
# obs, goal_obs, next_obs (raw f32 each), action u8, reward f32, done u8,
# episode u32, t u16
_TAIL = struct.Struct("<BfBIH")
_RECORD_SIZE = 3 * 4 * _OBS_SIZE + _TAIL.size


class BufferFormatError(IOError):
    """Bad magic, truncated payload, or checksum mismatch."""


@dataclass
class Transition:
    obs: np.ndarray
    goal_obs: np.ndarray
    action: int
    reward: float
    next_obs: np.ndarray
    done: bool
    episode_id: int
    t: int


@dataclass
class Buffer:
    transitions: list[Transition] = field(default_factory=list)

    def __len__(self):
        return len(self.transitions)

    def __iter__(self):
        return iter(self.transitions)

    def __getitem__(self, i):
        return self.transitions[i]


@dataclass
class SmoothedDataset:
    """Transitions plus smoothed targets r_star, aligned by index."""

    transitions: list[Transition]
    r_star: np.ndarray
    gamma: float
    horizon: int

    def __len__(self):
        return len(self.transitions)


def collect_random(env: GridEnv, n_transitions: int, seed: int | None = None) -> Buffer:
    """n uniformly random actions; each transition carries its episode's goal view."""
    if n_transitions <= 0:
        raise ValueError("n_transitions must be positive")
    rng = np.random.default_rng(seed) if seed is not None else env.rng
    buf = Buffer()
    episode = 0
    _, obs, goal_obs = env.reset()
    t = 0
    while len(buf) < n_transitions:
        action = Action(int(rng.integers(3)))
        outcome = env.step(action)
        buf.transitions.append(
            Transition(
                obs=obs,
                goal_obs=goal_obs,
                action=int(action),
                reward=float(np.float32(outcome.reward)),  # storage is f32
                next_obs=outcome.observation,
                done=bool(outcome.done),
                episode_id=episode,
                t=t,
            )
        )
        if outcome.done:
            episode += 1
            _, obs, goal_obs = env.reset()
            t = 0
        else:
            obs = outcome.observation
            t += 1
    return buf


def collect(env_kind: str, n_transitions: int, seed: int, **env_kwargs) -> Buffer:
    if env_kind == "two-room" and "goal" not in env_kwargs:
        env_kwargs["goal"] = "train"  # 50/50 training-goal placement
    env = make_env(env_kind, seed=seed, **env_kwargs)
    return collect_random(env, n_transitions)


def _episodes(transitions):
    """Consecutive index runs sharing an episode_id."""
    runs = []
    start = 0
    for i in range(1, len(transitions) + 1):
        if i == len(transitions) or transitions[i].episode_id != transitions[start].episode_id:
            runs.append((start, i))
            start = i
    return runs


def smooth_rewards(buf: Buffer, gamma: float, horizon: int) -> SmoothedDataset:
    """Backward-propagated targets; see module docstring for the rule.

    A truncated tail episode (no terminal transition) gets r* = 0: its end
    time is unknown so targets would be mislabeled.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must be in [0, 1], got {gamma}")
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    transitions = list(buf)
    r_star = np.zeros(len(transitions), dtype=np.float64)
    for start, end in _episodes(transitions):
        last = transitions[end - 1]
        if not last.done or last.reward <= 0.0:
            continue  # lava, timeout, or truncated tail: all-zero targets
        final_t = last.t
        for i in range(start, end):
            m = final_t - transitions[i].t
            if 0 <= m < horizon:
                r_star[i] = gamma**m * last.reward
    return SmoothedDataset(transitions, r_star, gamma, horizon)


def oversample_positives(ds: SmoothedDataset, factor: int, seed: int = 0) -> SmoothedDataset:
    """Repeats every r* > 0 transition `factor` times, then shuffles."""
    if factor < 1:
        raise ValueError("factor must be >= 1")
    idx = []
    for i, r in enumerate(ds.r_star):
        idx.extend([i] * (factor if r > 0 else 1))
    order = np.random.default_rng(seed).permutation(len(idx))
    idx = [idx[int(j)] for j in order]
    return SmoothedDataset(
        [ds.transitions[i] for i in idx],
        ds.r_star[idx],
        ds.gamma,
        ds.horizon,
    )


def split_by_episode(ds: SmoothedDataset, val_fraction: float = 0.1, seed: int = 0):
    """90/10-style split on episode ids, avoiding leakage between adjacent
    frames of the same episode. Episodes that carry positive smoothed
    targets are split separately from all-zero episodes, so the validation
    set keeps a representative share of the rare positives rather than
    drawing them by luck. Returns (train indices, validation indices)."""
    pos_ids = {t.episode_id for t, r in zip(ds.transitions, ds.r_star) if r > 0}
    all_ids = {t.episode_id for t in ds.transitions}
    rng = np.random.default_rng(seed)
    val_ids: set[int] = set()
    if len(all_ids) > 1:
        for group in (sorted(all_ids - pos_ids), sorted(pos_ids)):
            if not group:
                continue
            ids = list(group)
            rng.shuffle(ids)
            n_val = max(1, int(round(len(ids) * val_fraction)))
            if val_fraction <= 0:
                n_val = 0
            val_ids.update(ids[:n_val])
    train_idx = [i for i, t in enumerate(ds.transitions) if t.episode_id not in val_ids]
    val_idx = [i for i, t in enumerate(ds.transitions) if t.episode_id in val_ids]
    return np.array(train_idx, dtype=np.intp), np.array(val_idx, dtype=np.intp)


def save_buffer(buf: Buffer, path) -> None:
    body = bytearray()
    body += MAGIC
    body += struct.pack("<I", len(buf))
    for tr in buf:
        body += tr.obs.astype("<f4").tobytes()
        body += tr.goal_obs.astype("<f4").tobytes()
        body += tr.next_obs.astype("<f4").tobytes()
        body += _TAIL.pack(tr.action, tr.reward, int(tr.done), tr.episode_id, tr.t)
    crc = zlib.crc32(bytes(body)) & 0xFFFFFFFF
    body += struct.pack("<I", crc)
    with open(path, "wb") as fh:
        fh.write(bytes(body))


def buffer_checksum(path) -> int:
    """CRC recorded in the file trailer."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 4:
        raise BufferFormatError(f"{path}: too short")
    return struct.unpack("<I", data[-4:])[0]


def load_buffer(path) -> Buffer:
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(MAGIC):
        raise BufferFormatError(f"{path}: bad magic, expected RSBUF1")
    if len(data) < len(MAGIC) + 8:
        raise BufferFormatError(f"{path}: truncated header")
    stored_crc = struct.unpack("<I", data[-4:])[0]
    body = data[:-4]
    if zlib.crc32(body) & 0xFFFFFFFF != stored_crc:
        raise BufferFormatError(f"{path}: checksum mismatch")
    (count,) = struct.unpack_from("<I", body, len(MAGIC))
    off = len(MAGIC) + 4
    expected = off + count * _RECORD_SIZE
    if len(body) != expected:
        raise BufferFormatError(
            f"{path}: payload length {len(body)} != expected {expected}"
        )
    obs_bytes = 4 * _OBS_SIZE
    buf = Buffer()
    for _ in range(count):
        arrs = []
        for _block in range(3):
            arrs.append(
                np.frombuffer(body, dtype="<f4", count=_OBS_SIZE, offset=off)
                .reshape(28, 28, 3)
                .copy()
            )
            off += obs_bytes
        action, reward, done, episode, t = _TAIL.unpack_from(body, off)
        off += _TAIL.size
        buf.transitions.append(
            Transition(
                arrs[0], arrs[1], int(action), float(reward), arrs[2],
                bool(done), int(episode), int(t),
            )
        )
    return buf
