import numpy as np
import pytest

from gefzeros.gaussian_core import SeedLineage


@pytest.fixture
def lineage():
    return SeedLineage(20240611)


def stderr(x):
    x = np.asarray(x)
    return x.std(ddof=1) / np.sqrt(x.size)
