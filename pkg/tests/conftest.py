from typing import List, Tuple

import numpy as np
import pytest

from models.alignment import AlignConfig, GapEstimates
from models.strings import SeparatedString
from services.core import chain_instance, random_separated
from utils.constants import THREADS_ENV
from utils.rng import derive_rng
from utils.workers import reset_worker_count


class FixedDraws:
    """Stands in for a Generator whose uniform draws are known in advance"""

    def __init__(self, values):
        self.values = list(values)

    def random(self, size):
        drawn, self.values = self.values[:size], self.values[size:]
        return np.array(drawn, dtype=float)


@pytest.fixture(autouse=True)
def serial_workers(monkeypatch):
    monkeypatch.delenv(THREADS_ENV, raising=False)
    reset_worker_count()
    yield
    reset_worker_count()


@pytest.fixture
def chain_cfg() -> AlignConfig:
    return AlignConfig(c0=1.0, n_ref=1000)


@pytest.fixture
def chain() -> Tuple[List[int], GapEstimates]:
    """a = [10000, 100 x 10] with exact estimates b = a"""
    a = list(chain_instance(10_000, 100, 10).gaps)
    return a, GapEstimates(values=tuple(float(v) for v in a))


@pytest.fixture
def small_x() -> SeparatedString:
    return random_separated(600, 40, 5, derive_rng(7, "instance"))


@pytest.fixture
def fixed_draws():
    return FixedDraws
