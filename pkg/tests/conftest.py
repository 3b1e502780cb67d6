import numpy as np
import pytest

from qcs.random_objects import random_hermitian, random_pure_state


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def random_pair(rng):
    def make(dim):
        return random_hermitian(rng, dim), random_pure_state(rng, dim)

    return make
