import numpy as np
import pytest

from harmrec import (
    assemble_boundary_operators,
    assemble_stiffness,
    build_lshape_mesh,
    extract_boundary,
)


@pytest.fixture(scope="session")
def mesh2():
    return build_lshape_mesh(2)


@pytest.fixture(scope="session")
def mesh3():
    return build_lshape_mesh(3)


@pytest.fixture(scope="session")
def bmesh2(mesh2):
    return extract_boundary(mesh2)


@pytest.fixture(scope="session")
def bmesh3(mesh3):
    return extract_boundary(mesh3)


@pytest.fixture(scope="session")
def blocks2(mesh2):
    return assemble_stiffness(mesh2)


@pytest.fixture(scope="session")
def blocks3(mesh3):
    return assemble_stiffness(mesh3)


@pytest.fixture(scope="session")
def ops2(bmesh2):
    return assemble_boundary_operators(bmesh2)


@pytest.fixture(scope="session")
def ops3(bmesh3):
    return assemble_boundary_operators(bmesh3)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
