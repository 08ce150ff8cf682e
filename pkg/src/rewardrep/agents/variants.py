"""The six compared learner variants.

deep-rl retrains its encoder end to end with the policy; every other
variant freezes its encoder (our reward-predictive one or the SF one).
Shaping variants additionally wrap rollouts with the decayed predictor
potential. All variants share the same policy-path architecture and
parameter count.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from rewardrep.agents.policy import PolicyPath
from rewardrep.architectures import value_net
from rewardrep.nncore import Network
from rewardrep.shaping import ShapingConfig

VARIANT_NAMES = (
    "deep-rl",
    "sf",
    "ours-1r",
    "ours-shaping-1r",
    "ours-64r",
    "ours-shaping-64r",
)

_ALIASES = {
    "deeprl": "deep-rl",
    "ours+shaping-1r": "ours-shaping-1r",
    "ours+shaping-64r": "ours-shaping-64r",
}


def canonical_variant(name: str) -> str:
    key = name.strip().lower()
    key = _ALIASES.get(key, key)
    if key not in VARIANT_NAMES:
        raise ValueError(f"unknown variant {name!r}; options: {VARIANT_NAMES}")
    return key


@dataclass
class Learner:
    name: str
    path: PolicyPath
    value_net: Network
    shaping_config: ShapingConfig | None = None
    shaping_model: object = None

    @property
    def policy_path_param_count(self) -> int:
        return self.path.param_count


def build_variant(name: str, seed: int = 0, repr_model=None, repr_model_64=None,
                  sf_model=None, shaping_config: ShapingConfig | None = None) -> Learner:
    """Assembles a learner; raises if a required pretrained model is missing."""
    name = canonical_variant(name)
    shaper_cfg = None
    shaper_model = None

    if name == "deep-rl":
        path = PolicyPath(trainable_encoder=True, seed=seed)
    elif name == "sf":
        if sf_model is None:
            raise ValueError("variant 'sf' needs a pretrained SF model")
        path = PolicyPath(encoder=sf_model.encoder, trainable_encoder=False, seed=seed)
    else:
        model = repr_model if name.endswith("-1r") else repr_model_64
        if model is None:
            raise ValueError(f"variant {name!r} needs a trained reward-predictor model")
        path = PolicyPath(encoder=model.encoder, trainable_encoder=False, seed=seed)
        if "shaping" in name:
            shaper_cfg = shaping_config or ShapingConfig(mode="predictor")
            if shaper_cfg.mode != "predictor":
                raise ValueError("shaping variants use predictor-potential mode")
            shaper_model = model

    return Learner(
        name=name,
        path=path,
        value_net=value_net(seed=seed + 2),
        shaping_config=shaper_cfg,
        shaping_model=shaper_model,
    )
