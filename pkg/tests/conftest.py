import os

import numpy as np
import pytest

from rewardrep import dataset


def pytest_collection_modifyitems(config, items):
    if os.environ.get("RR_NIGHTLY"):
        return
    skip = pytest.mark.skip(reason="nightly suite; set RR_NIGHTLY=1 to run")
    for item in items:
        if "nightly" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def two_room_buffer_10k():
    """10k random two-room transitions with 50/50 training-goal placement.

    Shared by the dataset statistics tests and the predictor-quality
    acceptance criterion (collection takes a few seconds).
    """
    return dataset.collect("two-room", 10_000, seed=7)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
