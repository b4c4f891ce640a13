import numpy as np
import pytest

from qstrat.strategy import SpaceProfile


def random_profile(rng, max_turns=3, max_dim=3, min_turns=1):
    n = int(rng.integers(min_turns, max_turns + 1))
    in_dims = [int(d) for d in rng.integers(1, max_dim + 1, size=n)]
    out_dims = [int(d) for d in rng.integers(1, max_dim + 1, size=n)]
    return SpaceProfile.of_dims(in_dims, out_dims)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
