import numpy as np
import pytest

from resolversim.basis import generate_synthetic_basis
from resolversim.geometry import CASE_STUDY
from resolversim.winding import build_winding


@pytest.fixture(scope="session")
def fixture_basis():
    return generate_synthetic_basis(CASE_STUDY, 1000)


@pytest.fixture(scope="session")
def overlapping():
    return build_winding("overlapping", 70.0, 30.0, 5, 2.0, 12, 2)


@pytest.fixture(scope="session")
def non_overlapping():
    return build_winding("non_overlapping", 70.0, 30.0, 5, 2.0, 12, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
