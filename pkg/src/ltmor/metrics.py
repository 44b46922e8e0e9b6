"""Error measures: relative time-summed norms, the weighted Laplace-domain
projection error, exponentially weighted time norms, and the scalar
Paley-Wiener isometry check."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .laplace import SnapshotSet
from .rom import Trajectory


def _step_energies(states: np.ndarray, norm_matrix) -> np.ndarray:
    """||u(t_j)||^2 in the given matrix norm, one value per step."""
    return np.einsum("ji,ji->j", states, (norm_matrix @ states.T).T)


def relative_error(ref_traj: Trajectory, approx_traj: Trajectory, norm_matrix) -> float:
    """Root-sum-square relative error over all steps, in the matrix norm.

    Both trajectories must live on the identical time grid; the reference must
    not vanish identically.
    """
    if not np.array_equal(ref_traj.t_grid, approx_traj.t_grid):
        raise ValueError("trajectories are on different time grids")
    ref_energy = float(np.sum(_step_energies(ref_traj.states, norm_matrix)))
    if ref_energy == 0.0:
        raise ValueError("reference trajectory is identically zero; relative error undefined")
    diff = ref_traj.states - approx_traj.states
    return float(np.sqrt(np.sum(_step_energies(diff, norm_matrix)) / ref_energy))


def hardy_quadrature_error(snapshot_set: SnapshotSet, basis) -> float:
    """Weighted projection error of the snapshot columns onto a basis span.

    sum_j w_j * ||Re u_hat(s_j) - P Re u_hat(s_j)||^2 in the energy norm,
    with the B-orthogonal projector P = Phi Phi^T B.
    """
    phi = getattr(basis, "phi", basis)
    b_matrix = snapshot_set.fem.energy
    snaps = snapshot_set.columns
    residual = snaps - phi @ (phi.conj().T @ (b_matrix @ snaps))
    energies = np.einsum("ij,ij->j", residual.conj(), b_matrix @ residual).real
    return float(np.sum(snapshot_set.weights * energies))


def weighted_time_norm(traj: Trajectory, alpha: float, norm_matrix) -> float:
    """Trapezoidal value of integral exp(-2*alpha*t) * ||u(t)||^2 over the grid."""
    if alpha < 0:
        raise ValueError(f"weight exponent must be >= 0, got {alpha}")
    values = np.exp(-2.0 * alpha * traj.t_grid) * _step_energies(traj.states, norm_matrix)
    return float(np.trapezoid(values, traj.t_grid))


def paley_wiener_check(
    eigen_lambda: float,
    u0_coeff: float,
    alpha: float,
    tau_grid: np.ndarray,
) -> tuple[float, float]:
    """Both sides of the isometry for the scalar mode u(t) = u0 * exp(-lambda*t).

    Time side analytically, u0^2 / (2*(alpha+lambda)); Laplace side by
    trapezoidal quadrature of |u0 / (alpha + i*tau + lambda)|^2 / (2*pi) on
    the supplied grid.
    """
    time_side = u0_coeff**2 / (2.0 * (alpha + eigen_lambda))
    tau = np.asarray(tau_grid, dtype=float)
    integrand = u0_coeff**2 / ((alpha + eigen_lambda) ** 2 + tau**2)
    laplace_side = float(np.trapezoid(integrand, tau) / (2.0 * np.pi))
    return float(time_side), laplace_side


@dataclass(frozen=True)
class ErrorReport:
    """Per-R relative errors of one reduced-model sweep, with its spectrum."""

    r_values: np.ndarray
    err_l2: np.ndarray
    err_h1: np.ndarray
    sigma: np.ndarray
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def plateau_l2(self) -> float:
        return float(np.min(self.err_l2))

    @property
    def plateau_h1(self) -> float:
        return float(np.min(self.err_h1))

    def rows(self) -> list[tuple[int, float, float]]:
        return [
            (int(r), float(e2), float(e1))
            for r, e2, e1 in zip(self.r_values, self.err_l2, self.err_h1)
        ]

    def to_dict(self) -> dict[str, Any]:
        return {
            "r_values": [int(r) for r in self.r_values],
            "err_l2": [float(e) for e in self.err_l2],
            "err_h1": [float(e) for e in self.err_h1],
            "sigma": [float(s) for s in self.sigma],
            "plateau_l2": self.plateau_l2,
            "plateau_h1": self.plateau_h1,
            "metadata": dict(self.metadata),
        }
