"""Minimal dense/convolutional network core with hand-written backprop.

Fixed sequential layer stacks, valid padding only, float32 parameters.
Sized for sub-100k-parameter networks; no GPU, no general graphs.
"""

from rewardrep.nncore.layers import (
    Conv2D,
    Dense,
    Flatten,
    Logistic,
    MaxPool2D,
    ReLU,
    ShapeError,
    Softmax,
)
from rewardrep.nncore.network import Network, load_weights, save_weights
from rewardrep.nncore.optim import Adam, OptimizerError, SGD
from rewardrep.nncore.gradcheck import finite_difference_check

__all__ = [
    "Adam",
    "Conv2D",
    "Dense",
    "Flatten",
    "Logistic",
    "MaxPool2D",
    "Network",
    "OptimizerError",
    "ReLU",
    "SGD",
    "ShapeError",
    "Softmax",
    "finite_difference_check",
    "load_weights",
    "save_weights",
]
