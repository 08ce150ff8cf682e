"""Aggregation of per-run metrics into mean and two-standard-deviation bands."""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass

import numpy as np


@dataclass
class EvalPoint:
    step: int
    mean_reward: float
    reward_band: float  # 2 * stddev across runs
    min_episode_len: float
    len_band: float
    per_run_rewards: list[float]
    per_run_min_lens: list[float]


class CurveError(ValueError):
    pass


def read_metrics(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    cols = {name: np.array([float(r[i]) for r in rows]) for i, name in enumerate(header)}
    return cols


def aggregate_curves(run_files) -> list[EvalPoint]:
    """Per-step mean and 2-sigma band over runs; step grids must align."""
    if not run_files:
        raise CurveError("no run files given")
    tables = []
    for path in run_files:
        if os.path.isdir(path):
            path = os.path.join(path, "metrics.csv")
        tables.append((path, read_metrics(path)))
    steps0 = tables[0][1]["step"]
    misaligned = [p for p, t in tables if not np.array_equal(t["step"], steps0)]
    if misaligned:
        raise CurveError(f"misaligned eval step grids in: {misaligned}")
    if len(tables) == 1:
        warnings.warn("aggregating a single run: bands are zero", stacklevel=2)

    points = []
    rewards = np.stack([t["mean_reward"] for _, t in tables])
    min_lens = np.stack([t["min_episode_len"] for _, t in tables])
    for i, step in enumerate(steps0):
        r = rewards[:, i]
        ml = min_lens[:, i]
        points.append(
            EvalPoint(
                step=int(step),
                mean_reward=float(r.mean()),
                reward_band=2.0 * float(r.std(ddof=1)) if len(r) > 1 else 0.0,
                min_episode_len=float(ml.mean()),
                len_band=2.0 * float(ml.std(ddof=1)) if len(ml) > 1 else 0.0,
                per_run_rewards=[float(v) for v in r],
                per_run_min_lens=[float(v) for v in ml],
            )
        )
    return points


def write_curve_csv(points, path):
    with open(path, "w") as fh:
        fh.write("step,mean_reward,reward_band,min_episode_len,len_band\n")
        for p in points:
            fh.write(
                f"{p.step},{p.mean_reward:.10g},{p.reward_band:.10g},"
                f"{p.min_episode_len:.10g},{p.len_band:.10g}\n"
            )
