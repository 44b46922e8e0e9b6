"""Structured simplicial meshes of the unit interval and unit square.

The domain is (-1/2, 1/2)^d.  Meshes are uniform with ``n`` cells per side;
in 2D every grid cell is split into two triangles along the diagonal from
its lower-left to its upper-right corner, both oriented counter-clockwise.
Construction is fully deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class StructuredMesh:
    """Uniform simplicial mesh with boundary identification.

    Attributes:
        dim: spatial dimension, 1 or 2.
        nodes: node coordinates, shape (n_nodes, dim).
        elements: node-index tuples per element, shape (n_elements, dim + 1).
        is_boundary: per-node flag, True iff the node lies on the boundary.
        free_index: interior-DOF index per node, -1 for boundary nodes.
    """

    dim: int
    nodes: np.ndarray
    elements: np.ndarray
    is_boundary: np.ndarray
    free_index: np.ndarray

    @property
    def n_free(self) -> int:
        return int((~self.is_boundary).sum())

    @property
    def free_nodes(self) -> np.ndarray:
        """Indices of interior nodes, ordered by their interior-DOF index."""
        return np.flatnonzero(~self.is_boundary)


def _free_index_from_flags(is_boundary: np.ndarray) -> np.ndarray:
    free = np.full(is_boundary.size, -1, dtype=np.int64)
    free[~is_boundary] = np.arange((~is_boundary).sum())
    return free


def build_interval_mesh(n: int) -> StructuredMesh:
    """Mesh of (-1/2, 1/2) with n equal cells and nodes x_j = -1/2 + j/n."""
    if n < 1:
        raise ValueError(f"cells per side must be >= 1, got {n}")
    nodes = (-0.5 + np.arange(n + 1) / n).reshape(-1, 1)
    elements = np.column_stack([np.arange(n), np.arange(1, n + 1)]).astype(np.int64)
    is_boundary = np.zeros(n + 1, dtype=bool)
    is_boundary[[0, n]] = True
    return StructuredMesh(1, nodes, elements, is_boundary, _free_index_from_flags(is_boundary))


def build_square_mesh(n: int) -> StructuredMesh:
    """Mesh of (-1/2, 1/2)^2 with n cells per side, 2 n^2 triangles."""
    if n < 1:
        raise ValueError(f"cells per side must be >= 1, got {n}")
    ticks = -0.5 + np.arange(n + 1) / n
    xx, yy = np.meshgrid(ticks, ticks, indexing="xy")
    nodes = np.column_stack([xx.ravel(), yy.ravel()])

    def node_id(ix: int, iy: int) -> int:
        return iy * (n + 1) + ix

    elements = np.empty((2 * n * n, 3), dtype=np.int64)
    k = 0
    for iy in range(n):
        for ix in range(n):
            ll = node_id(ix, iy)
            lr = node_id(ix + 1, iy)
            ur = node_id(ix + 1, iy + 1)
            ul = node_id(ix, iy + 1)
            elements[k] = (ll, lr, ur)
            elements[k + 1] = (ll, ur, ul)
            k += 2

    on_edge = np.zeros(n + 1, dtype=bool)
    on_edge[[0, n]] = True
    ex, ey = np.meshgrid(on_edge, on_edge, indexing="xy")
    is_boundary = (ex | ey).ravel()
    return StructuredMesh(2, nodes, elements, is_boundary, _free_index_from_flags(is_boundary))


def element_measures(mesh: StructuredMesh) -> np.ndarray:
    """Length (1D) or area (2D) of every element; areas are signed-positive
    because elements are stored counter-clockwise."""
    coords = mesh.nodes[mesh.elements]
    if mesh.dim == 1:
        return coords[:, 1, 0] - coords[:, 0, 0]
    e1 = coords[:, 1] - coords[:, 0]
    e2 = coords[:, 2] - coords[:, 0]
    return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
