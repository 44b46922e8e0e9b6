"""Contour snapshot plans and the complex shifted solves that fill them.

Nodes follow the cotangent rule on the vertical line Re{s} = alpha:

    theta_i = 2*pi*i/M,   s_i = alpha + 1j*beta*cot(theta_i/2),
    w_i = pi*beta / (M * sin(theta_i/2)^2),       i = 1..M-1,

while the singular node i = M (theta = 2*pi) is replaced by the initial
condition itself with weight w_M = pi/(M*beta).  Conjugate nodes pair up as
s_{M-i} = conj(s_i), so only the first M/2 systems are solved; the remaining
real-part columns are duplicates and the last column is the initial state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NumericalError
from .fem import FemOperators

KIND_REGULAR = "regular"
KIND_REAL_AXIS = "real-axis"
KIND_INITIAL_CONDITION = "initial-condition"

SHIFTED_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class SnapshotNode:
    index: int
    theta: float
    s: complex | None  # None marks the initial-condition node
    weight: float
    kind: str


@dataclass(frozen=True)
class SnapshotPlan:
    alpha: float
    beta: float
    m_total: int
    nodes: tuple[SnapshotNode, ...]

    @property
    def weights(self) -> np.ndarray:
        return np.array([node.weight for node in self.nodes])

    def node(self, index: int) -> SnapshotNode:
        """Node by 1-based contour index."""
        return self.nodes[index - 1]


@dataclass(frozen=True)
class SnapshotSet:
    """Real snapshot matrix plus the complex solutions it was built from.

    ``columns`` is N_free x M with column i = Re{u_hat(s_i)} and column M the
    initial state.  ``complex_cache`` keeps the M/2 computed solutions and the
    initial state (M/2 + 1 columns) for symmetry tests.
    """

    plan: SnapshotPlan
    columns: np.ndarray
    complex_cache: np.ndarray
    fem: FemOperators
    solved_nodes: tuple[int, ...]

    @property
    def weights(self) -> np.ndarray:
        return self.plan.weights

    def complex_matrix(self) -> np.ndarray:
        """All M complex columns, conjugate nodes filled by conjugation."""
        m = self.plan.m_total
        out = np.empty((self.columns.shape[0], m), dtype=complex)
        half = m // 2
        out[:, :half] = self.complex_cache[:, :half]
        for i in range(half + 1, m):
            out[:, i - 1] = np.conj(self.complex_cache[:, m - i - 1])
        out[:, m - 1] = self.complex_cache[:, half]
        return out


def make_snapshot_plan(alpha: float, beta: float, m: int) -> SnapshotPlan:
    """Contour nodes, weights and kinds for an even node count m >= 4."""
    if m < 4 or m % 2 != 0:
        raise ValueError(f"node count must be even and >= 4, got {m}")
    if alpha <= 0:
        raise ValueError(f"contour abscissa alpha must be positive, got {alpha}")
    if beta <= 0:
        raise ValueError(f"contour scale beta must be positive, got {beta}")
    nodes: list[SnapshotNode | None] = [None] * m
    for i in range(1, m // 2 + 1):
        theta = 2.0 * math.pi * i / m
        s = complex(alpha, beta * math.cos(theta / 2.0) / math.sin(theta / 2.0))
        weight = math.pi * beta / (m * math.sin(theta / 2.0) ** 2)
        kind = KIND_REAL_AXIS if 2 * i == m else KIND_REGULAR
        if kind == KIND_REAL_AXIS:
            s = complex(alpha, 0.0)  # cot(pi/2) = 0 exactly
        nodes[i - 1] = SnapshotNode(i, theta, s, weight, kind)
        if i < m // 2:
            # Mirror node: exact conjugate and identical weight by construction.
            nodes[m - i - 1] = SnapshotNode(
                m - i, 2.0 * math.pi * (m - i) / m, s.conjugate(), weight, KIND_REGULAR
            )
    nodes[m - 1] = SnapshotNode(
        m, 2.0 * math.pi, None, math.pi / (m * beta), KIND_INITIAL_CONDITION
    )
    return SnapshotPlan(alpha, beta, m, tuple(nodes))


def solve_shifted(
    fem: FemOperators,
    g_h: np.ndarray,
    u0_h: np.ndarray,
    b_hat: complex,
    s: complex,
) -> np.ndarray:
    """Solve (s*M + A) u_hat = b_hat*g_h + M*u0_h for one Laplace node."""
    s = complex(s)
    if s.real <= 0:
        raise ValueError(f"shift must satisfy Re{{s}} > 0 for coercivity, got {s}")
    rhs = complex(b_hat) * g_h.astype(complex) + fem.mass @ u0_h.astype(complex)
    matrix = sp.csc_array(s * fem.mass + fem.stiffness.astype(complex))
    try:
        factor = spla.splu(matrix)
        solution = factor.solve(rhs)
    except Exception as exc:  # factorization breakdown
        raise NumericalError(f"shifted solve failed at s = {s}: {exc}") from exc
    rhs_norm = np.linalg.norm(rhs)
    if rhs_norm == 0.0:
        return np.zeros(fem.n_free, dtype=complex)

    # Backward-error style relative residual: the rhs carries the O(h^d) mass
    # scaling while the operator is O(1/h^..), so ||r||/||b|| alone would sit
    # at the double-precision floor for fine meshes.
    matrix_norm = float(np.abs(matrix).sum(axis=0).max())

    def rel_residual(x: np.ndarray) -> float:
        r = np.linalg.norm(matrix @ x - rhs)
        return r / (matrix_norm * np.linalg.norm(x) + rhs_norm)

    residual = rel_residual(solution)
    for _ in range(2):
        if residual <= SHIFTED_RESIDUAL_TOL:
            break
        # One cheap refinement pass with the existing factorization.
        solution = solution + factor.solve(rhs - matrix @ solution)
        residual = rel_residual(solution)
    if not residual <= SHIFTED_RESIDUAL_TOL:
        raise NumericalError(
            f"shifted solve at s = {s} has relative residual {residual:.3e} "
            f"(tolerance {SHIFTED_RESIDUAL_TOL})"
        )
    return solution


def compute_snapshots(
    plan: SnapshotPlan,
    fem: FemOperators,
    g_h: np.ndarray,
    u0_h: np.ndarray,
    b_hat_fn: Callable[[complex], complex],
) -> SnapshotSet:
    """Fill the snapshot matrix, solving only the first M/2 nodes.

    Columns M/2+1 .. M-1 are duplicates of their conjugate partners (the real
    part of conjugate solutions is identical) and column M is the initial
    state, so M/2 linear systems are solved in total.
    """
    m = plan.m_total
    half = m // 2
    n = fem.n_free
    columns = np.empty((n, m))
    cache = np.empty((n, half + 1), dtype=complex)
    solved = []
    for i in range(1, half + 1):
        node = plan.node(i)
        u_hat = solve_shifted(fem, g_h, u0_h, b_hat_fn(node.s), node.s)
        cache[:, i - 1] = u_hat
        columns[:, i - 1] = u_hat.real
        solved.append(i)
    for i in range(half + 1, m):
        columns[:, i - 1] = columns[:, m - i - 1]
    columns[:, m - 1] = u0_h
    cache[:, half] = u0_h
    return SnapshotSet(plan, columns, cache, fem, tuple(solved))
