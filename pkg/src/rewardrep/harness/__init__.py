"""Experiment front-end: config files, training runs, metric aggregation,
and artifact emission (CSV plus rendered figures)."""

from rewardrep.harness.config import ConfigError, ExperimentConfig, parse_config_file
from rewardrep.harness.run import evaluate, train_agent, trajmap
from rewardrep.harness.curves import EvalPoint, aggregate_curves

__all__ = [
    "ConfigError",
    "EvalPoint",
    "ExperimentConfig",
    "aggregate_curves",
    "evaluate",
    "parse_config_file",
    "train_agent",
    "trajmap",
]
