"""P1 finite-element assembly for the parabolic operator and the H^1_0 inner
product, with homogeneous Dirichlet conditions imposed by restriction to the
interior (free) degrees of freedom.

Element integrals for the matrices are exact closed forms:
1D mass (h/6)[[2,1],[1,2]] and stiffness (1/h)[[1,-1],[-1,1]]; in 2D the
standard P1 triangle formulas.  Load vectors use a fixed quadrature that is
exact for quadratics: Simpson's rule on intervals, the three edge midpoints
on triangles.

Nodal fields are plain float arrays over the free DOFs, ordered by interior
DOF index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NumericalError
from .mesh import StructuredMesh, element_measures

SpatialFunction = Callable[[np.ndarray], float]
GradientFunction = Callable[[np.ndarray], np.ndarray]

BOUNDARY_TRACE_TOL = 1e-12


@dataclass(frozen=True)
class FemOperators:
    """Assembled matrices restricted to the free DOFs.

    ``energy`` is the H^1_0 Gram matrix; ``stiffness`` equals
    ``diffusion * energy`` for the constant scalar coefficient used here.
    """

    mass: sp.csr_array
    stiffness: sp.csr_array
    energy: sp.csr_array
    n_free: int


def _local_matrices(mesh: StructuredMesh) -> tuple[np.ndarray, np.ndarray]:
    """Per-element mass and H^1_0 blocks, shapes (ne, nv, nv)."""
    coords = mesh.nodes[mesh.elements]
    if mesh.dim == 1:
        h = coords[:, 1, 0] - coords[:, 0, 0]
        mass = h[:, None, None] / 6.0 * np.array([[2.0, 1.0], [1.0, 2.0]])
        energy = (1.0 / h)[:, None, None] * np.array([[1.0, -1.0], [-1.0, 1.0]])
        return mass, energy
    x, y = coords[..., 0], coords[..., 1]
    # b_i = y_j - y_k and c_i = x_k - x_j for cyclic (i, j, k)
    b = y[:, [1, 2, 0]] - y[:, [2, 0, 1]]
    c = x[:, [2, 0, 1]] - x[:, [1, 2, 0]]
    area = element_measures(mesh)
    energy = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) / (
        4.0 * area[:, None, None]
    )
    mass = area[:, None, None] / 12.0 * (np.ones((3, 3)) + np.eye(3))
    return mass, energy


def _assemble(mesh: StructuredMesh, local: np.ndarray) -> sp.csr_array:
    nv = mesh.elements.shape[1]
    rows = np.repeat(mesh.elements, nv, axis=1).ravel()
    cols = np.tile(mesh.elements, (1, nv)).ravel()
    n = mesh.nodes.shape[0]
    return sp.csr_array(sp.coo_array((local.ravel(), (rows, cols)), shape=(n, n)))


def assemble_full(mesh: StructuredMesh) -> tuple[sp.csr_array, sp.csr_array]:
    """Unrestricted mass and H^1_0 matrices over all nodes, boundary included."""
    mass_local, energy_local = _local_matrices(mesh)
    return _assemble(mesh, mass_local), _assemble(mesh, energy_local)


def assemble_operators(mesh: StructuredMesh, diffusion: float) -> FemOperators:
    """Assemble mass, stiffness and energy matrices on the free DOFs."""
    if diffusion <= 0:
        raise ValueError(f"diffusion coefficient must be positive, got {diffusion}")
    if mesh.n_free == 0:
        raise ValueError("mesh has no interior degrees of freedom (empty system)")
    mass_full, energy_full = assemble_full(mesh)
    free = mesh.free_nodes
    mass = mass_full[np.ix_(free, free)]
    energy = energy_full[np.ix_(free, free)]
    return FemOperators(
        mass=sp.csr_array(mass),
        stiffness=sp.csr_array(diffusion * energy),
        energy=sp.csr_array(energy),
        n_free=free.size,
    )


def _quadrature(mesh: StructuredMesh):
    """Quadrature points/weights and P1 hat data per element.

    Returns (points (ne, nq, dim), weights (ne, nq), hat_values (nq, nv),
    hat_gradients (ne, nv, dim)).  The point rules are exact for quadratics.
    """
    coords = mesh.nodes[mesh.elements]
    if mesh.dim == 1:
        h = coords[:, 1, 0] - coords[:, 0, 0]
        mid = 0.5 * (coords[:, 0, 0] + coords[:, 1, 0])
        points = np.stack([coords[:, 0], mid[:, None], coords[:, 1]], axis=1)
        weights = np.column_stack([h / 6.0, 4.0 * h / 6.0, h / 6.0])
        hat_values = np.array([[1.0, 0.0], [0.5, 0.5], [0.0, 1.0]])
        grads = np.stack([-1.0 / h, 1.0 / h], axis=1)[:, :, None]
        return points, weights, hat_values, grads
    points = 0.5 * (coords[:, [0, 1, 2]] + coords[:, [1, 2, 0]])  # edge midpoints
    area = element_measures(mesh)
    weights = np.repeat(area[:, None] / 3.0, 3, axis=1)
    hat_values = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])
    x, y = coords[..., 0], coords[..., 1]
    b = y[:, [1, 2, 0]] - y[:, [2, 0, 1]]
    c = x[:, [2, 0, 1]] - x[:, [1, 2, 0]]
    grads = np.stack([b, c], axis=2) / (2.0 * area[:, None, None])
    return points, weights, hat_values, grads


def assemble_load(mesh: StructuredMesh, fem: FemOperators, g: SpatialFunction) -> np.ndarray:
    """Load vector entries integral(g * phi_i) on the free DOFs."""
    points, weights, hat_values, _ = _quadrature(mesh)
    ne, nq = weights.shape
    g_vals = np.array([[g(points[e, q]) for q in range(nq)] for e in range(ne)])
    local = (weights * g_vals) @ hat_values  # (ne, nv)
    full = np.zeros(mesh.nodes.shape[0])
    np.add.at(full, mesh.elements.ravel(), local.ravel())
    return full[mesh.free_nodes]


def _gradient_quadrature(mesh: StructuredMesh):
    """Interior one-point rule (midpoint / centroid) with hat gradients.

    Gradient data of P1 fields is discontinuous across element boundaries, so
    the projection right-hand side samples strictly inside each element.
    """
    coords = mesh.nodes[mesh.elements]
    points = coords.mean(axis=1)[:, None, :]
    weights = np.abs(element_measures(mesh))[:, None]
    _, _, _, grads = _quadrature(mesh)
    return points, weights, grads


def interpolate(mesh: StructuredMesh, u0: SpatialFunction) -> np.ndarray:
    """Nodal interpolant of u0 on the free DOFs; u0 must vanish on the boundary."""
    boundary = np.flatnonzero(mesh.is_boundary)
    trace = max(abs(u0(mesh.nodes[b])) for b in boundary)
    if trace > BOUNDARY_TRACE_TOL:
        raise ValueError(
            f"initial condition has nonzero boundary trace ({trace:.3e} > {BOUNDARY_TRACE_TOL})"
        )
    return np.array([u0(mesh.nodes[i]) for i in mesh.free_nodes])


def project_h1(mesh: StructuredMesh, fem: FemOperators, grad_u0: GradientFunction) -> np.ndarray:
    """H^1_0-orthogonal projection onto the FE space, from the gradient of u0.

    Solves energy @ p = r with r_i = integral(grad u0 . grad phi_i) computed
    by the interior element quadrature.
    """
    points, weights, grads = _gradient_quadrature(mesh)
    ne, nq = weights.shape
    g_vals = np.empty((ne, nq, mesh.dim))
    for e in range(ne):
        for q in range(nq):
            g_vals[e, q] = grad_u0(points[e, q])
    # grad(phi) is constant per element, so sum quadrature of grad(u0) first
    flux = np.einsum("eq,eqd->ed", weights, g_vals)
    local = np.einsum("ed,evd->ev", flux, grads)
    full = np.zeros(mesh.nodes.shape[0])
    np.add.at(full, mesh.elements.ravel(), local.ravel())
    rhs = full[mesh.free_nodes]
    if not np.any(rhs):
        return np.zeros(fem.n_free)
    p = spla.spsolve(sp.csc_array(fem.energy), rhs)
    residual = np.linalg.norm(fem.energy @ p - rhs) / np.linalg.norm(rhs)
    if not np.isfinite(residual) or residual > 1e-10:
        raise NumericalError(f"H^1_0 projection solve failed, relative residual {residual:.3e}")
    return p
