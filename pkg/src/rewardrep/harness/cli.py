"""Command-line front-end.

Subcommands: collect, train-repr, train-agent, evaluate, heatmap, curves,
trajmap. Exit codes: 0 success, 2 configuration error, 1 runtime failure.
Report-producing subcommands write a figure next to each CSV.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from rewardrep import dataset
from rewardrep.agents.policy import PolicyPath
from rewardrep.agents.variants import Learner, canonical_variant
from rewardrep.architectures import value_net
from rewardrep.gridworld import make_env
from rewardrep.harness import curves as curves_mod
from rewardrep.harness import plots
from rewardrep.harness.config import (
    KNOWN_KEYS,
    ConfigError,
    ExperimentConfig,
    apply_seed_env,
    parse_config_file,
    parse_config_text,
)
from rewardrep.harness.run import evaluate, train_agent, trajmap
from rewardrep.nncore import load_weights
from rewardrep.reprlearn import ReprModel, TrainConfig, heatmap, train
from rewardrep.shaping import ShapingConfigError


def _fail_config(msg):
    print(f"config error: {msg}", file=sys.stderr)
    return 2


def _parse_overrides(pairs):
    """--set section.key=value overrides, applied after the config file."""
    return "\n".join(pair.replace("=", " = ", 1) for pair in pairs)


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if getattr(args, "config", None):
        cfg = parse_config_file(args.config, cfg)
    if getattr(args, "set", None):
        cfg = parse_config_text(_parse_overrides(args.set), cfg)
    # dedicated flags win over config file and --set
    for flag, key in (
        ("env", "run.env"),
        ("variant", "run.variant"),
        ("algo", "run.algo"),
        ("steps", "run.total_steps"),
        ("seeds", "run.seeds"),
        ("out", "run.out"),
        ("name", "run.name"),
        ("repr1", "models.repr1"),
        ("repr64", "models.repr64"),
        ("buffer", "models.buffer"),
        ("goal", "env.goal"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            attr, parse = KNOWN_KEYS[key]
            setattr(cfg, attr, parse(value))
    return apply_seed_env(cfg)


def cmd_collect(args):
    env_kwargs = {}
    if args.env == "two-room":
        env_kwargs["goal"] = args.goal if args.goal is not None else "train"
    buf = dataset.collect(args.env, args.n, args.seed, **env_kwargs)
    dataset.save_buffer(buf, args.out)
    print(f"collected {len(buf)} transitions -> {args.out}")
    return 0


def cmd_train_repr(args):
    buf = dataset.load_buffer(args.buffer)
    smoothed = dataset.smooth_rewards(buf, args.gamma, args.m)
    model = ReprModel(seed=args.seed)
    model.meta.update(
        {
            "gamma": args.gamma,
            "M": args.m,
            "oversample": args.oversample,
            "dataset_checksum": dataset.buffer_checksum(args.buffer),
        }
    )
    cfg = TrainConfig(
        epochs=args.epochs, seed=args.seed, lr=args.lr, oversample=args.oversample
    )
    history = train(model, smoothed, cfg)
    model.save(args.out)
    last = history[-1]
    print(
        f"trained {len(history)} epochs, final train MSE {last['train_mse']:.6g}, "
        f"val MSE {last['val_mse']:.6g} -> {args.out}"
    )
    return 0


def cmd_train_agent(args):
    cfg = _load_config(args)
    canonical_variant(cfg.variant)  # validate early

    def progress(seed, steps, metrics):
        print(
            f"[seed {seed}] step {steps}: mean_reward {metrics['mean_reward']:.3f} "
            f"min_len {metrics['min_episode_len']}"
        )

    dirs = train_agent(cfg, progress=progress)
    for seed, d in dirs.items():
        print(f"seed {seed}: {d}/metrics.csv")
    return 0


def load_learner(run_dir) -> tuple[Learner, ExperimentConfig, int]:
    manifest = os.path.join(run_dir, "manifest.txt")
    if not os.path.exists(manifest):
        raise ConfigError(f"no manifest.txt in {run_dir}")
    seed = 0
    lines = []
    with open(manifest) as fh:
        for line in fh:
            if line.startswith("seed ="):
                seed = int(line.split("=", 1)[1])
            elif not line.startswith("#"):
                lines.append(line)
    cfg = parse_config_text("".join(lines))
    path = PolicyPath(trainable_encoder=False, seed=seed)
    learner = Learner(name=cfg.variant, path=path, value_net=value_net(seed))
    ckpt = os.path.join(run_dir, "checkpoints")
    for net, name in (
        (learner.path.policy, "policy.rsnn"),
        (learner.path.encoder, "encoder.rsnn"),
        (learner.value_net, "value.rsnn"),
    ):
        fname = os.path.join(ckpt, name)
        if not os.path.exists(fname):
            raise ConfigError(f"missing checkpoint file {fname}")
        load_weights(net, fname)
    return learner, cfg, seed


def cmd_evaluate(args):
    learner, cfg, seed = load_learner(args.run)
    env_kwargs = {"goal": cfg.env_goal} if cfg.env == "two-room" else {}
    metrics = evaluate(
        learner, cfg.env, args.rollouts, seed=args.seed, greedy=args.greedy,
        env_kwargs=env_kwargs,
    )
    print(
        f"mean_reward {metrics['mean_reward']:.6g} "
        f"mean_episode_len {metrics['mean_episode_len']:.6g} "
        f"min_episode_len {metrics['min_episode_len']}"
    )
    return 0


def cmd_heatmap(args):
    model = ReprModel.load(args.model)
    env_kwargs = {"goal": args.goal} if args.env == "two-room" else {}
    env = make_env(args.env, seed=args.seed, **env_kwargs)
    state, _, _ = env.reset()
    values = heatmap(model, state.grid)
    plots.heatmap_csv(values, args.out)
    png = os.path.splitext(args.out)[0] + ".png"
    plots.plot_heatmap(values, state.grid, png)
    print(f"heatmap -> {args.out}, {png}")
    return 0


def cmd_curves(args):
    points = curves_mod.aggregate_curves(args.runs)
    curves_mod.write_curve_csv(points, args.out)
    png = os.path.splitext(args.out)[0] + ".png"
    plots.plot_curves(points, png)
    print(f"curves over {len(args.runs)} runs -> {args.out}, {png}")
    return 0


def cmd_trajmap(args):
    learner, cfg, seed = load_learner(args.run)
    env_kwargs = {"goal": cfg.env_goal} if cfg.env == "two-room" else {}
    episodes = trajmap(learner, cfg.env, args.episodes, seed=args.seed,
                       env_kwargs=env_kwargs)
    with open(args.out, "w") as fh:
        fh.write("episode,order,x,y,success\n")
        for ep in episodes:
            for i, (x, y) in enumerate(ep["tiles"]):
                fh.write(f"{ep['episode']},{i},{x},{y},{int(ep['success'])}\n")
    env = make_env(cfg.env, seed=seed, **env_kwargs)
    state, _, _ = env.reset()
    png = os.path.splitext(args.out)[0] + ".png"
    plots.plot_trajectories(episodes, state.grid, png)
    print(f"trajectories -> {args.out}, {png}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="rewardrep")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("collect", help="gather random-policy transitions into a buffer")
    p.add_argument("--env", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--goal", default=None, help="two-room goal placement mode")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_collect)

    p = sub.add_parser("train-repr", help="train the encoder + reward predictor")
    p.add_argument("--buffer", required=True)
    p.add_argument("--m", type=int, default=64, help="smoothing horizon (1 = raw rewards)")
    p.add_argument("--gamma", type=float, default=0.99)
    p.add_argument("--oversample", type=int, default=10)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="model output directory")
    p.set_defaults(func=cmd_train_repr)

    p = sub.add_parser("train-agent", help="train a policy-gradient agent variant")
    p.add_argument("--config", default=None)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--env", default=None)
    p.add_argument("--goal", default=None)
    p.add_argument("--variant", default=None)
    p.add_argument("--algo", default=None)
    p.add_argument("--steps", default=None)
    p.add_argument("--seeds", default=None)
    p.add_argument("--name", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--repr1", default=None)
    p.add_argument("--repr64", default=None)
    p.add_argument("--buffer", default=None)
    p.set_defaults(func=cmd_train_agent)

    p = sub.add_parser("evaluate", help="evaluate a trained run (no shaping)")
    p.add_argument("--run", required=True)
    p.add_argument("--rollouts", type=int, default=10)
    p.add_argument("--greedy", action="store_true")
    p.add_argument("--seed", type=int, default=999)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("heatmap", help="per-tile mean predicted reward grid")
    p.add_argument("--model", required=True)
    p.add_argument("--env", default="two-room")
    p.add_argument("--goal", default="train0")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("curves", help="aggregate run metrics into curves")
    p.add_argument("--runs", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("trajmap", help="dump tile-visit trajectories")
    p.add_argument("--run", required=True)
    p.add_argument("--episodes", type=int, default=6)
    p.add_argument("--seed", type=int, default=999)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_trajmap)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ShapingConfigError, ValueError) as exc:
        return _fail_config(exc)
    except FileNotFoundError as exc:
        print(f"missing file: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - single CLI failure boundary
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
