import numpy as np
import pytest

from degenwave import assemble, build_mesh, make_generator, matrix_exponential

DELTA = 2e-3


@pytest.fixture(scope="session")
def mesh99():
    return build_mesh(99)


@pytest.fixture(scope="session")
def ops99(mesh99):
    return assemble(mesh99)


@pytest.fixture(scope="session")
def gen99(ops99):
    return make_generator(ops99)


@pytest.fixture(scope="session")
def prop99(gen99):
    return matrix_exponential(gen99, DELTA, points=5)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
