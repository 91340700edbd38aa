import pytest
from hypothesis import settings

from gpk.gibbs import DirichletProcess, PitmanYor

settings.register_profile("default", deadline=None)
settings.load_profile("default")


@pytest.fixture
def py55():
    return PitmanYor(0.5, 0.5)


@pytest.fixture
def dp1():
    return DirichletProcess(1.0)


def close(a, b, rel=0.0, abs_=0.0):
    return abs(a - b) <= max(abs_, rel * abs(b))
