"""
Fixtures compartilhadas pelos testes
"""
import numpy as np
import pytest

from halfspace_kpz.env import SeededSource, WeightField, materialize
from halfspace_kpz.models import EnvironmentSpec, MCConfig, WeightKind, Window


@pytest.fixture
def source():
    return SeededSource(master_seed=12345)


@pytest.fixture
def make_field(source):
    """
    Constrói um campo a partir de uma matriz indexada por [i - i_min, j - j_min]
    """
    def _make(values, i_min=1, j_min=1, symmetric=False):
        values = np.array(values, dtype=np.float64)
        rows, cols = values.shape
        window = Window(i_min=i_min, i_max=i_min + rows - 1, j_min=j_min, j_max=j_min + cols - 1)
        spec = EnvironmentSpec(alpha=0.5, symmetric=symmetric, window=window)
        return WeightField(spec, source, values)

    return _make


@pytest.fixture
def symmetric_field(source):
    spec = EnvironmentSpec(kind=WeightKind.EXPONENTIAL, alpha=0.7, theta=0.5, window=Window.square(1, 8))
    return materialize(spec, source)


@pytest.fixture
def small_mc():
    return MCConfig(replicas=40, seed=7, workers=1, batch_size=8, show_progress=False)
