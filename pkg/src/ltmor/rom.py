"""Backward-Euler time stepping shared by the full-order and reduced models.

One stepper serves both: sparse full-order systems are advanced with a single
LU factorization of (M + dt*A), while small dense reduced systems are advanced
through the spectral decomposition of the SPD pencil (A, M), which makes each
step a handful of vector operations.  Both branches realize the identical
recurrence

    (M + dt*A) u^{n+1} = M u^n + dt * b(t_{n+1}) * load.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NumericalError
from .fem import FemOperators

SPACE_FULL = "full"
SPACE_REDUCED = "reduced"


@dataclass(frozen=True)
class Trajectory:
    """Uniform time grid t_j = j*T/Nt and one coefficient vector per step."""

    t_grid: np.ndarray
    states: np.ndarray  # (Nt + 1, dim)
    space_tag: str

    @property
    def n_steps(self) -> int:
        return self.t_grid.size - 1


@dataclass(frozen=True)
class ReducedModel:
    """Galerkin projections Phi^T M Phi, Phi^T A Phi, Phi^T g and the
    B-orthogonal initial coefficients."""

    mass_r: np.ndarray
    stiff_r: np.ndarray
    load_r: np.ndarray
    c0: np.ndarray


def backward_euler(
    mass,
    stiff,
    load_vector: np.ndarray,
    b_of_t: Callable[[float], float],
    u0: np.ndarray,
    horizon: float,
    n_steps: int,
    space_tag: str = SPACE_FULL,
) -> Trajectory:
    """Advance M u' + A u = b(t) * load from u0 over [0, horizon]."""
    if horizon <= 0:
        raise ValueError(f"time horizon must be positive, got {horizon}")
    if n_steps < 1:
        raise ValueError(f"step count must be >= 1, got {n_steps}")
    n = load_vector.shape[0]
    if u0.shape != (n,):
        raise ValueError(f"initial state has shape {u0.shape}, expected ({n},)")
    dt = horizon / n_steps
    t_grid = np.arange(n_steps + 1) * dt
    b_vals = np.array([b_of_t(t) for t in t_grid[1:]])
    states = np.empty((n_steps + 1, n))
    states[0] = u0

    if sp.issparse(mass):
        try:
            solver = spla.splu(sp.csc_array(mass + dt * stiff))
        except Exception as exc:
            raise NumericalError(f"time-step factorization failed: {exc}") from exc
        u = u0.astype(float)
        for j in range(n_steps):
            u = solver.solve(mass @ u + (dt * b_vals[j]) * load_vector)
            states[j + 1] = u
        return Trajectory(t_grid, states, space_tag)

    # Dense path: diagonalize the pencil once, then step coefficient-wise.
    try:
        eigvals, modes = sla.eigh(np.asarray(stiff), np.asarray(mass))
    except sla.LinAlgError as exc:
        raise NumericalError(f"time-step factorization failed: {exc}") from exc
    y = modes.T @ (mass @ u0)
    q = modes.T @ load_vector
    gain = 1.0 / (1.0 + dt * eigvals)
    coeffs = np.empty((n_steps + 1, n))
    coeffs[0] = y
    for j in range(n_steps):
        y = (y + (dt * b_vals[j]) * q) * gain
        coeffs[j + 1] = y
    np.matmul(coeffs, modes.T, out=states)
    return Trajectory(t_grid, states, space_tag)


def project_model(fem: FemOperators, basis, g_h: np.ndarray, u0_h: np.ndarray) -> ReducedModel:
    """Galerkin projection of the semi-discrete problem onto a B-orthonormal basis."""
    phi = getattr(basis, "phi", basis)
    if phi.shape[0] != fem.n_free:
        raise ValueError(f"basis has {phi.shape[0]} rows, operators have {fem.n_free}")
    if g_h.shape != (fem.n_free,) or u0_h.shape != (fem.n_free,):
        raise ValueError("load and initial state must be nodal fields over the free DOFs")
    mass_r = phi.T @ (fem.mass @ phi)
    stiff_r = phi.T @ (fem.stiffness @ phi)
    return ReducedModel(
        mass_r=0.5 * (mass_r + mass_r.T),
        stiff_r=0.5 * (stiff_r + stiff_r.T),
        load_r=phi.T @ g_h,
        c0=phi.T @ (fem.energy @ u0_h),
    )


def lift(basis, reduced_traj: Trajectory) -> Trajectory:
    """Map reduced coefficients back to nodal fields, states Phi @ c(t_j)."""
    phi = getattr(basis, "phi", basis)
    if reduced_traj.states.shape[1] != phi.shape[1]:
        raise ValueError(
            f"trajectory dimension {reduced_traj.states.shape[1]} does not match "
            f"basis dimension {phi.shape[1]}"
        )
    return Trajectory(reduced_traj.t_grid, reduced_traj.states @ phi.T, SPACE_FULL)
