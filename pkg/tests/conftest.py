import numpy as np
import pytest

from src.anisotropy import Euclidean, Quadratic, build_wulff, half_l1
from src.quadrature import QuadratureSpec
from src.shapes import Ball, Box, Polygon2D


@pytest.fixture
def spec():
    return QuadratureSpec(mc_samples=200_000, seed=7)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


@pytest.fixture
def square_tension():
    return half_l1(2)


@pytest.fixture
def quadratic_tension():
    return Quadratic(np.diag([1.0, 2.0]))


@pytest.fixture
def euclidean_wulff():
    return build_wulff(Euclidean(2), 128)


@pytest.fixture
def unit_square():
    return Box([1.0, 1.0])


@pytest.fixture
def unit_disk():
    return Ball(2, 1.0)


@pytest.fixture
def triangle():
    return Polygon2D.from_vertices([[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]])


@pytest.fixture
def l_shape():
    return Polygon2D.from_vertices([[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]])
