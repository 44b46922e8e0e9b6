"""Weighted proper orthogonal decomposition in the H^1_0 inner product.

Two interchangeable routes compute the basis minimizing the weighted
projection error sum_j w_j * ||S_j - P S_j||^2_B:

* method of snapshots: eigen-decomposition of the M x M correlation matrix
  C = D^(1/2) S^T B S D^(1/2), preferable when M <= N;
* Cholesky-SVD: B = R^T R, then the SVD of R S D^(1/2), preferable when
  N <= M.

Both return a B-orthonormal basis with the same singular values and span
(up to floating-point effects in the trailing modes).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import NumericalError
from .rom import Trajectory

# Relative singular-value cutoff for the numerical rank.
RANK_TOL = 1e-12

# Below this many DOFs a dense Cholesky factor of B is cheap, and the SVD
# route resolves singular values down to eps*sigma_1; the correlation route
# saturates at sqrt(eps)*sigma_1 because it squares the conditioning.
CHOLESKY_LIMIT = 2000

# Eigenvalues of the correlation matrix below this multiple of eps*lambda_1
# are formation noise, not signal; the route cannot certify modes beneath
# sqrt(eps)*sigma_1 no matter the requested cutoff.
_CORRELATION_NOISE = 64 * np.finfo(float).eps


@dataclass(frozen=True)
class ReducedBasis:
    """B-orthonormal basis matrix with its singular-value history.

    ``sigma`` keeps the full positive spectrum even when ``phi`` is truncated
    to fewer columns.  ``truncated`` flags a request that exceeded the
    numerical rank; ``max_imag`` is reported by the complex route only.
    """

    phi: np.ndarray
    sigma: np.ndarray
    r_rank: int
    method: str
    truncated: bool = False
    max_imag: float | None = None


def _dense(matrix) -> np.ndarray:
    return matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix)


def _check_weights(weights: np.ndarray, n_cols: int) -> np.ndarray:
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (n_cols,):
        raise ValueError(f"expected {n_cols} weights, got shape {weights.shape}")
    if np.any(weights <= 0):
        raise ValueError("snapshot weights must be strictly positive")
    return weights


def _fix_phase(phi: np.ndarray) -> np.ndarray:
    """Deterministic column normalization: rotate each complex column so its
    dominant direction is real, then make the largest-magnitude entry
    positive."""
    if phi.shape[1] == 0:
        return phi
    if np.iscomplexobj(phi):
        # Least-squares phase: minimize the imaginary energy of e^{-i t} phi_j.
        re, im = phi.real, phi.imag
        theta = 0.5 * np.arctan2(
            2.0 * np.einsum("ij,ij->j", re, im),
            np.einsum("ij,ij->j", re, re) - np.einsum("ij,ij->j", im, im),
        )
        phi = phi * np.exp(-1j * theta)
    idx = np.abs(phi).argmax(axis=0)
    lead = phi[idx, np.arange(phi.shape[1])]
    if np.iscomplexobj(phi):
        sign = np.where(lead.real < 0, -1.0, 1.0)
    else:
        sign = np.where(lead < 0, -1.0, 1.0)
    return phi * sign


def _b_orthonormalize(phi: np.ndarray, b_matrix, drop_tol: float = 1e-6) -> np.ndarray:
    """Gram-Schmidt with reorthogonalization in the B inner product.

    The correlation route amplifies rounding in trailing modes by
    (sigma_1/sigma_j)^2, so columns near the noise floor arrive far from
    orthonormal and can be outright dependent.  This pass restores
    orthonormality without touching the span of any leading column block and
    drops columns whose independent part falls below ``drop_tol`` of their
    original size.
    """
    kept: list[np.ndarray] = []
    for j in range(phi.shape[1]):
        v = phi[:, j].copy()
        norm0 = np.sqrt((v.conj() @ (b_matrix @ v)).real)
        if norm0 == 0.0:
            continue
        for _ in range(2):
            for q in kept:
                v -= q * (q.conj() @ (b_matrix @ v))
        norm = np.sqrt((v.conj() @ (b_matrix @ v)).real)
        if norm < drop_tol * norm0:
            continue
        kept.append(v / norm)
    if not kept:
        return phi[:, :0]
    return np.column_stack(kept)


def _empty_basis(n: int, method: str, complex_dtype: bool = False) -> ReducedBasis:
    dtype = complex if complex_dtype else float
    return ReducedBasis(np.zeros((n, 0), dtype=dtype), np.zeros(0), 0, method)


def _correlation_pod(snapshots, weights, b_matrix, r, method: str) -> ReducedBasis:
    scaled = snapshots * np.sqrt(weights)[None, :]
    corr = scaled.conj().T @ (b_matrix @ scaled)
    corr = 0.5 * (corr + corr.conj().T)
    eigvals, eigvecs = sla.eigh(corr)
    eigvals, eigvecs = eigvals[::-1], eigvecs[:, ::-1]
    if eigvals.size == 0 or eigvals[0] <= 0:
        return _empty_basis(snapshots.shape[0], method, np.iscomplexobj(snapshots))
    cutoff = max(RANK_TOL**2, _CORRELATION_NOISE) * eigvals[0]
    keep = eigvals > cutoff
    sigma = np.sqrt(eigvals[keep])
    phi_all = scaled @ (eigvecs[:, : sigma.size] / sigma)
    phi_all = _b_orthonormalize(phi_all, b_matrix)
    r_rank = phi_all.shape[1]
    sigma = sigma[:r_rank]
    n_cols = r_rank if r is None else min(r, r_rank)
    truncated = r is not None and r > r_rank
    phi = _fix_phase(phi_all[:, :n_cols])
    return ReducedBasis(phi, sigma, r_rank, method, truncated,
                        max_imag=float(np.abs(phi.imag).max(initial=0.0))
                        if np.iscomplexobj(phi) else None)


def _cholesky_pod(snapshots, weights, b_matrix, r, method: str) -> ReducedBasis:
    try:
        upper = sla.cholesky(_dense(b_matrix))
    except sla.LinAlgError as exc:
        raise NumericalError(f"inner-product matrix is not positive definite: {exc}") from exc
    scaled = upper @ (snapshots * np.sqrt(weights)[None, :])
    left, sigma_all, _ = sla.svd(scaled, full_matrices=False)
    if sigma_all.size == 0 or sigma_all[0] <= 0:
        return _empty_basis(snapshots.shape[0], method, np.iscomplexobj(snapshots))
    keep = sigma_all > RANK_TOL * sigma_all[0]
    sigma = sigma_all[keep]
    r_rank = sigma.size
    n_cols = r_rank if r is None else min(r, r_rank)
    truncated = r is not None and r > r_rank
    phi = _fix_phase(sla.solve_triangular(upper, left[:, :n_cols], lower=False))
    return ReducedBasis(phi, sigma, r_rank, method, truncated,
                        max_imag=float(np.abs(phi.imag).max(initial=0.0))
                        if np.iscomplexobj(phi) else None)


def pod_method_of_snapshots(snapshots: np.ndarray, weights, b_matrix, r: int | None = None) -> ReducedBasis:
    """POD via the M x M correlation matrix (no Cholesky factor of B needed)."""
    weights = _check_weights(weights, snapshots.shape[1])
    return _correlation_pod(np.asarray(snapshots, dtype=float), weights, b_matrix, r, "snapshots")


def pod_cholesky_svd(snapshots: np.ndarray, weights, b_matrix, r: int | None = None) -> ReducedBasis:
    """POD via B = R^T R and the SVD of R S D^(1/2)."""
    snapshots = np.asarray(snapshots, dtype=float)
    weights = _check_weights(weights, snapshots.shape[1])
    return _cholesky_pod(snapshots, weights, b_matrix, r, "cholesky-svd")


def prefer_cholesky_route(n_rows: int, n_cols: int) -> bool:
    """Route policy: the SVD route wherever its dense Cholesky factor is
    affordable (it resolves far smaller singular values); the correlation
    route only for large state dimensions with few snapshots."""
    return n_rows <= CHOLESKY_LIMIT or n_rows <= n_cols


def pod_complex(snapshots: np.ndarray, weights, b_matrix, r: int | None = None) -> ReducedBasis:
    """POD of a complex snapshot matrix in the complexified inner product.

    For conjugate-closed column sets the result is real up to roundoff; the
    residual imaginary magnitude is reported in ``max_imag``.
    """
    snapshots = np.asarray(snapshots, dtype=complex)
    weights = _check_weights(weights, snapshots.shape[1])
    if prefer_cholesky_route(*snapshots.shape):
        return _cholesky_pod(snapshots, weights, b_matrix, r, "cholesky-svd")
    return _correlation_pod(snapshots, weights, b_matrix, r, "snapshots")


def time_domain_pod(trajectory: Trajectory, b_matrix, r: int | None = None) -> ReducedBasis:
    """Unit-weight POD of a time-stepped state history (the offline baseline
    that requires the full-order solve it is meant to replace)."""
    snapshots = np.ascontiguousarray(trajectory.states.T)
    weights = np.ones(snapshots.shape[1])
    if prefer_cholesky_route(*snapshots.shape):
        return pod_cholesky_svd(snapshots, weights, b_matrix, r)
    return pod_method_of_snapshots(snapshots, weights, b_matrix, r)


def pod_residual(snapshots: np.ndarray, weights, b_matrix, basis: ReducedBasis) -> float:
    """Weighted projection error sum_j w_j ||S_j - Phi Phi^T B S_j||^2_B.

    By the Schmidt-Eckart-Young theorem this equals the sum of the squared
    singular values beyond the basis dimension.
    """
    weights = _check_weights(weights, snapshots.shape[1])
    phi = basis.phi
    residual = snapshots - phi @ (phi.conj().T @ (b_matrix @ snapshots))
    energies = np.einsum("ij,ij->j", residual.conj(), b_matrix @ residual).real
    return float(np.sum(weights * energies))


def principal_angles(basis_a, basis_b, b_matrix) -> np.ndarray:
    """Principal angles (radians, in [0, pi/2]) between two B-orthonormal spans.

    The spans are mapped into the Euclidean inner product with a Cholesky
    factor of B, then the combined sine/cosine algorithm resolves angles all
    the way down to machine precision (the plain arccos of the cross-Gram
    SVD bottoms out near sqrt(eps)).
    """
    phi_a = basis_a.phi if isinstance(basis_a, ReducedBasis) else np.asarray(basis_a)
    phi_b = basis_b.phi if isinstance(basis_b, ReducedBasis) else np.asarray(basis_b)
    if phi_a.shape[0] != phi_b.shape[0]:
        raise ValueError(
            f"basis dimensions do not match: {phi_a.shape[0]} vs {phi_b.shape[0]} rows"
        )
    if phi_a.shape[1] == 0 or phi_b.shape[1] == 0:
        return np.zeros(0)
    upper = sla.cholesky(_dense(b_matrix))
    angles = sla.subspace_angles(upper @ phi_a, upper @ phi_b)
    return np.sort(angles)
