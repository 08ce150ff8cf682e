"""Network builders shared across the workbench.

Encoder: 28x28x3 -> 9x9x8 -> 4x4x8 -> 1x1x16 -> 16 (valid padding throughout).
Predictor: 32 -> 256 -> 256 -> 1 with a logistic output in (0, 1).
Policy: 32 -> 64 -> 64 -> 3 linear logits. Value head: 32 -> 64 -> 64 -> 1.
"""

from rewardrep.nncore import Conv2D, Dense, Flatten, Logistic, MaxPool2D, Network, ReLU

OBS_SHAPE = (28, 28, 3)
FEATURE_DIM = 16
POLICY_INPUT_DIM = 2 * FEATURE_DIM
N_ACTIONS = 3


def encoder_net(seed=0) -> Network:
    # Kernel sizes are chosen so that every input pixel falls inside the
    # receptive field of the final feature vector while reproducing the
    # published shape chain exactly. With 3x3/stride-3 kernels (and a 2x2
    # pool) the stack is blind to all pixels outside the top-left 18x18
    # region, which collapses visually distinct egocentric views and makes
    # the reward predictor unable to localize goals.
    return Network(
        [
            Conv2D(filters=8, size=4, stride=3),
            ReLU(),
            MaxPool2D(size=3, stride=2),
            Conv2D(filters=16, size=4, stride=1),
            ReLU(),
            Flatten(),
            Dense(FEATURE_DIM),
        ],
        OBS_SHAPE,
        seed=seed,
    )


def predictor_net(seed=0) -> Network:
    return Network(
        [Dense(256), ReLU(), Dense(256), ReLU(), Dense(1), Logistic()],
        (POLICY_INPUT_DIM,),
        seed=seed,
    )


def policy_net(seed=0) -> Network:
    return Network(
        [Dense(64), ReLU(), Dense(64), ReLU(), Dense(N_ACTIONS)],
        (POLICY_INPUT_DIM,),
        seed=seed,
    )


def value_net(seed=0) -> Network:
    return Network(
        [Dense(64), ReLU(), Dense(64), ReLU(), Dense(1)],
        (POLICY_INPUT_DIM,),
        seed=seed,
    )
