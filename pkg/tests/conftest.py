import numpy as np
import pytest

from sads_udw.geometry import make_geometry
from sads_udw.modecache import ModeCache


@pytest.fixture(scope="session")
def g01():
    return make_geometry(0.1)


@pytest.fixture(scope="session")
def shared_cache():
    """One in-memory mode cache for the whole run; modes are immutable."""
    return ModeCache()


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
