"""Flat "section.key = value" experiment configuration.

Unknown keys are rejected (typo safety). CLI flags override file values,
and the RS_SEED environment variable overrides the seed list for CI smoke
runs. Lists are comma-separated.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields


class ConfigError(ValueError):
    pass


def _int_list(text):
    return [int(tok) for tok in str(text).split(",") if tok.strip() != ""]


def _xy_list(text):
    out = []
    for tok in str(text).split(";"):
        tok = tok.strip()
        if not tok:
            continue
        x, y = tok.split(",")
        out.append((int(x), int(y)))
    return out


@dataclass
class ExperimentConfig:
    name: str = "run"
    env: str = "two-room"
    env_goal: str = "train0"
    variant: str = "ours-1r"
    algo: str = "ppo"
    seeds: list[int] = field(default_factory=lambda: [0])
    total_steps: int = 50_000
    eval_interval: int = 5_000
    eval_rollouts: int = 10
    out: str = "runs"
    repr1: str = ""
    repr64: str = ""
    buffer: str = ""  # random-policy buffer, used to pretrain the SF variant
    shaping_mode: str = "predictor"
    shaping_gamma: float = 0.99
    shaping_h: int = 500
    shaping_delta: int = 0
    shaping_antigoals: list[tuple[int, int]] = field(default_factory=list)
    lr: float = 5e-4
    clip_eps: float = 0.2
    ppo_epochs: int = 4
    minibatch_size: int = 32
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    max_grad_norm: float = 0.5
    n_steps: int = 128
    gamma: float = 0.99
    lam: float = 0.95


# file/flag key -> (attribute, parser)
KNOWN_KEYS = {
    "run.name": ("name", str),
    "run.env": ("env", str),
    "run.variant": ("variant", str),
    "run.algo": ("algo", str),
    "run.seeds": ("seeds", _int_list),
    "run.total_steps": ("total_steps", int),
    "run.eval_interval": ("eval_interval", int),
    "run.eval_rollouts": ("eval_rollouts", int),
    "run.out": ("out", str),
    "env.goal": ("env_goal", str),
    "models.repr1": ("repr1", str),
    "models.repr64": ("repr64", str),
    "models.buffer": ("buffer", str),
    "shaping.mode": ("shaping_mode", str),
    "shaping.gamma": ("shaping_gamma", float),
    "shaping.H": ("shaping_h", int),
    "shaping.delta": ("shaping_delta", int),
    "shaping.antigoals": ("shaping_antigoals", _xy_list),
    "ppo.lr": ("lr", float),
    "ppo.clip": ("clip_eps", float),
    "ppo.epochs": ("ppo_epochs", int),
    "ppo.minibatch": ("minibatch_size", int),
    "ppo.entropy_coef": ("entropy_coef", float),
    "ppo.value_coef": ("value_coef", float),
    "ppo.grad_clip": ("max_grad_norm", float),
    "ppo.n_steps": ("n_steps", int),
    "ppo.gamma": ("gamma", float),
    "ppo.lam": ("lam", float),
}


def parse_config_text(text: str, config: ExperimentConfig | None = None) -> ExperimentConfig:
    cfg = config or ExperimentConfig()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        attr, parse = KNOWN_KEYS[key]
        try:
            setattr(cfg, attr, parse(value))
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    return cfg


def parse_config_file(path, config: ExperimentConfig | None = None) -> ExperimentConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text, config)


def apply_seed_env(cfg: ExperimentConfig) -> ExperimentConfig:
    """RS_SEED overrides the seed list (CI smoke runs)."""
    override = os.environ.get("RS_SEED")
    if override:
        cfg.seeds = _int_list(override)
    return cfg


def manifest_text(cfg: ExperimentConfig, seed: int, version: str) -> str:
    lines = [f"# rewardrep {version}", f"seed = {seed}"]
    for key, (attr, _) in KNOWN_KEYS.items():
        value = getattr(cfg, attr)
        if isinstance(value, list):
            if value and isinstance(value[0], tuple):
                value = ";".join(f"{x},{y}" for x, y in value)
            else:
                value = ",".join(str(v) for v in value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
