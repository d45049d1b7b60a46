import numpy as np
import pytest

from motionoracle.action_graph import ActionGraph
from motionoracle.config import MotionOracleConfig
from motionoracle.tracker import TrackerConfig
from motionoracle.vmo import build_oracle
from .util import gesture_features

GESTURE_THETA = 0.08


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def tracker_config():
    return TrackerConfig(max_blobs=4, birth_cost=10.0, continuity_bias=0.9)


@pytest.fixture
def motionoracle_config():
    return MotionOracleConfig({})


@pytest.fixture
def motionoracle_config_dict():
    return {
        "TRACKER": {"max_blobs": 2, "birth_cost": 5.0},
        "ORACLE": {"theta_candidates": [0.01, 0.05, 0.5]},
        "STREAM": {"rate": 60.0},
    }


@pytest.fixture(scope="session")
def concat_features():
    """Three gestures of 60 frames followed by a warped repeat of the first."""
    features, _ = gesture_features("concat", 60, count=3, repeat=0, warp=1.2)
    return features


@pytest.fixture(scope="session")
def gesture_graph(concat_features):
    return ActionGraph(build_oracle(concat_features, GESTURE_THETA))
