"""Reward-predictive representation learning and reward shaping workbench.

Learns a visual state representation by regressing (optionally smoothed)
sparse rewards in single-goal gridworlds, reuses the frozen encoder as
preprocessing for policy-gradient agents, and augments sparse rewards with
a decaying potential-based shaping bonus built from the trained predictor.
"""

__version__ = "0.1.0"
