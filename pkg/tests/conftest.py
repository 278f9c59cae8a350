import numpy as np
import pytest
from hypothesis import settings

from hyplab.family import cat_family, perturbed_cat_family, shear_family

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def cat():
    return cat_family()


@pytest.fixture(scope="session")
def shear():
    return shear_family()


@pytest.fixture(scope="session")
def perturbed():
    return perturbed_cat_family(1e-3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
