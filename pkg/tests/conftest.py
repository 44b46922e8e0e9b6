import numpy as np
import pytest
import scipy.linalg as sla

from ltmor import assemble_operators, build_interval_mesh, build_square_mesh


@pytest.fixture(scope="session")
def interval16():
    mesh = build_interval_mesh(16)
    return mesh, assemble_operators(mesh, 1.0)


@pytest.fixture(scope="session")
def interval64():
    mesh = build_interval_mesh(64)
    return mesh, assemble_operators(mesh, 1.0)


@pytest.fixture(scope="session")
def square8():
    mesh = build_square_mesh(8)
    return mesh, assemble_operators(mesh, 1.0)


@pytest.fixture(scope="session")
def eigenpairs64(interval64):
    _, fem = interval64
    vals, vecs = sla.eigh(fem.stiffness.toarray(), fem.mass.toarray())
    return vals, vecs


def b_norm(matrix, v) -> float:
    return float(np.sqrt(np.real(np.vdot(v, matrix @ v))))
