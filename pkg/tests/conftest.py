"""Shared fixtures: small grid measures, costs and converged reference states"""
import logging

import numpy as np
import pytest

from costs.cost_models import HalfSquaredEuclidean
from measures.grids import build_grid_measure
from measures.models import gaussian_model
from transport.sinkhorn import solve_reference

logging.getLogger("sinkhorn_lab").setLevel(logging.WARNING)

BOX_2D = [[-3.0, 3.0], [-3.0, 3.0]]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def gaussian_1d():
    return build_grid_measure(gaussian_model(1.0, 1), [[-3.0, 3.0]], 25)


@pytest.fixture(scope="session")
def shifted_gaussian_1d():
    return build_grid_measure(gaussian_model(2.0, 1, [0.5]), [[-2.5, 3.5]], 21)


@pytest.fixture(scope="session")
def gaussian_2d():
    return build_grid_measure(gaussian_model(1.0, 2), BOX_2D, 9)


@pytest.fixture(scope="session")
def shifted_gaussian_2d():
    return build_grid_measure(gaussian_model(1.0, 2, [0.5, -0.5]), BOX_2D, 9)


@pytest.fixture(scope="session")
def quadratic():
    return HalfSquaredEuclidean()


@pytest.fixture(scope="session")
def reference_2d(gaussian_2d, shifted_gaussian_2d, quadratic):
    """Converged ε = 1 state of the 2D Gaussian pair"""
    return solve_reference(gaussian_2d, shifted_gaussian_2d, quadratic, 1.0)


@pytest.fixture(scope="session")
def reference_1d(gaussian_1d, shifted_gaussian_1d, quadratic):
    return solve_reference(gaussian_1d, shifted_gaussian_1d, quadratic, 0.5)
