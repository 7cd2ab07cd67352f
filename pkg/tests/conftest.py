import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from picput.probspace import Channel, JointPmf  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def dsbs():
    """Uniform bit through BSC(0.1)."""
    return JointPmf([[0.45, 0.05], [0.05, 0.45]])


@pytest.fixture
def bsc():
    return Channel.bsc
