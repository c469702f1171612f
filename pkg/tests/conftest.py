import numpy as np
import pytest

from isoarea.ambient import make_rng


@pytest.fixture
def rng():
    return make_rng(1234)


def random_unit(rng, dim):
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)
