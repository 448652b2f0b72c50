import numpy as np
import pytest

from caricatureforge import build_operators, face_patch, gaussian_curvature, icosphere, torus


@pytest.fixture(scope="session")
def sphere_162():
    return icosphere(2)


@pytest.fixture(scope="session")
def sphere_642():
    return icosphere(3)


@pytest.fixture(scope="session")
def sphere_2562():
    return icosphere(4)


@pytest.fixture(scope="session")
def sphere_ops(sphere_162):
    return build_operators(sphere_162)


@pytest.fixture(scope="session")
def sphere_curv(sphere_162, sphere_ops):
    return gaussian_curvature(sphere_162, sphere_ops)


@pytest.fixture(scope="session")
def face_5k():
    return face_patch(71)


@pytest.fixture(scope="session")
def face_small():
    return face_patch(21)


@pytest.fixture(scope="session")
def torus_mesh():
    return torus(1.0, 0.4, 48, 24)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
