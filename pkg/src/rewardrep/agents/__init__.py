"""Policy-gradient learners over 32-dim feature inputs, plus the
deep-RL-from-scratch and successor-feature comparison preprocessors."""

from rewardrep.agents.policy import PolicyPath, act, softmax
from rewardrep.agents.gae import compute_gae, normalize
from rewardrep.agents.update import PPOConfig, a2c_update, ppo_update
from rewardrep.agents.rollout import RolloutBatch, collect_rollout
from rewardrep.agents.sf import SFModel, closed_form_successor, fit_successor_lstsq, sf_pretrain
from rewardrep.agents.variants import VARIANT_NAMES, Learner, build_variant

__all__ = [
    "Learner",
    "PPOConfig",
    "PolicyPath",
    "RolloutBatch",
    "SFModel",
    "VARIANT_NAMES",
    "a2c_update",
    "act",
    "build_variant",
    "closed_form_successor",
    "collect_rollout",
    "compute_gae",
    "normalize",
    "fit_successor_lstsq",
    "ppo_update",
    "sf_pretrain",
    "softmax",
]
