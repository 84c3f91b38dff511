import numpy as np
import pytest

from bdfactor.examples import linear, mm1, mm_inf


def all_presets():
    return [mm1(1, 2, 0), mm1(1, 2, 1), mm1(2, 1, 0), mm1(1, 1, 0.5), mm1(3, 1, 0.5),
            mm_inf(1, 1), mm_inf(3, 2), linear(1, 2, 1), linear(2, 1, 1), linear(1, 1, 3),
            linear(1, 1, 0.5)]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
