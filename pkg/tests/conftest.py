import numpy as np
import pytest

from fermi1d import BoundaryCondition, Grid, build_basis


@pytest.fixture(scope="session")
def grid400():
    return Grid(400)


@pytest.fixture(scope="session")
def grid200():
    return Grid(200)


@pytest.fixture(scope="session")
def neumann_basis(grid400):
    return build_basis(BoundaryCondition.NEUMANN, grid400, 10)


@pytest.fixture(scope="session")
def periodic_basis(grid400):
    return build_basis(BoundaryCondition.PERIODIC, grid400, 9)


@pytest.fixture(scope="session")
def antiperiodic_basis(grid400):
    return build_basis(BoundaryCondition.ANTIPERIODIC, grid400, 10)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
