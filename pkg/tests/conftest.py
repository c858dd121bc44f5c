import numpy as np
import pytest

from usgesture.evaluation import DatasetSpec, build_features
from usgesture.pulse import PulseTrainConfig


@pytest.fixture(scope="session")
def config():
    return PulseTrainConfig()


@pytest.fixture(scope="session")
def small_features(config):
    """A light, noisy dataset: 12 profiles of each of the six classes."""
    spec = DatasetSpec(repetitions_per_gesture=12, master_seed=11)
    return build_features(spec, config)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
