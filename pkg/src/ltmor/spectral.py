"""Spectral extremes of the FE pencil and the contour geometry built on them.

The extreme generalized eigenvalues of (A, M) determine the contour scale
maximizing the geometric convergence rate:

    beta_opt = sqrt((alpha + lambda_min) * (alpha + lambda_max)),
    eta      = |(-lambda_max - alpha - beta) / (-lambda_max - alpha + beta)|,

together with the Moebius map between the half-plane Re{s} > alpha and the
unit disk, its circle images, and the denominator diagnostic used by the
convergence bound.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NumericalError
from .fem import FemOperators

EIG_RESIDUAL_TOL = 1e-8
EIG_MAX_ITER = 10_000
DENSE_LIMIT = 200
# Finite sentinel reported when the pencil has a single eigenvalue and the
# geometric rate degenerates.
ETA_DEGENERATE = 1e16


@dataclass(frozen=True)
class SpectralBounds:
    lambda_min: float
    lambda_max: float
    iterations: int
    residuals: tuple[float, float]


@dataclass(frozen=True)
class ContourParams:
    alpha: float
    beta_opt: float
    eta_opt: float
    degenerate: bool = False


def _residual(fem: FemOperators, x: np.ndarray, rho: float) -> float:
    mx = fem.mass @ x
    return float(np.linalg.norm(fem.stiffness @ x - rho * mx) / np.linalg.norm(mx))


def _rayleigh(fem: FemOperators, x: np.ndarray) -> float:
    return float((x @ (fem.stiffness @ x)) / (x @ (fem.mass @ x)))


def _m_normalize(fem: FemOperators, x: np.ndarray) -> np.ndarray:
    return x / np.sqrt(x @ (fem.mass @ x))


def extreme_eigenvalues(fem: FemOperators) -> SpectralBounds:
    """Smallest and largest generalized eigenvalue of (A, M).

    Dense generalized solve below DENSE_LIMIT free DOFs; otherwise inverse
    power iteration for the bottom and power iteration with Rayleigh-quotient
    polishing for the top, both M-normalized.
    """
    n = fem.n_free
    if n <= DENSE_LIMIT:
        vals, vecs = sla.eigh(fem.stiffness.toarray(), fem.mass.toarray())
        res = (_residual(fem, vecs[:, 0], vals[0]), _residual(fem, vecs[:, -1], vals[-1]))
        return SpectralBounds(float(vals[0]), float(vals[-1]), 0, res)

    iterations = 0
    start = _m_normalize(fem, np.ones(n))

    # Bottom of the spectrum: inverse power iteration on (A, M).
    lu_a = spla.splu(sp.csc_array(fem.stiffness))
    x = start
    rho = _rayleigh(fem, x)
    res_min = _residual(fem, x, rho)
    while res_min > EIG_RESIDUAL_TOL:
        if iterations >= EIG_MAX_ITER:
            raise NumericalError(
                f"inverse power iteration stalled, residual {res_min:.3e} after {iterations} steps"
            )
        x = _m_normalize(fem, lu_a.solve(fem.mass @ x))
        rho = _rayleigh(fem, x)
        res_min = _residual(fem, x, rho)
        iterations += 1
    lambda_min = rho

    # Top of the spectrum: power iteration on M^{-1} A, then Rayleigh-quotient
    # iteration once the cluster is located (the top eigenvalues of a uniform
    # mesh are nearly degenerate, which makes plain power iteration crawl).
    lu_m = spla.splu(sp.csc_array(fem.mass))
    x = start
    rho = _rayleigh(fem, x)
    res_max = _residual(fem, x, rho)
    power_steps = 0
    while res_max > EIG_RESIDUAL_TOL and power_steps < 200:
        x = _m_normalize(fem, lu_m.solve(fem.stiffness @ x))
        rho = _rayleigh(fem, x)
        res_max = _residual(fem, x, rho)
        power_steps += 1
        iterations += 1
    while res_max > EIG_RESIDUAL_TOL:
        if iterations >= EIG_MAX_ITER:
            raise NumericalError(
                f"power iteration stalled, residual {res_max:.3e} after {iterations} steps"
            )
        shift = rho
        try:
            lu_shift = spla.splu(sp.csc_array(fem.stiffness - shift * fem.mass))
            y = lu_shift.solve(fem.mass @ x)
        except Exception:
            # The shift hit an eigenvalue; nudge and retry on the next pass.
            shift *= 1.0 + 1e-10
            lu_shift = spla.splu(sp.csc_array(fem.stiffness - shift * fem.mass))
            y = lu_shift.solve(fem.mass @ x)
        if not np.all(np.isfinite(y)):
            break
        x = _m_normalize(fem, y)
        rho = _rayleigh(fem, x)
        res_max = _residual(fem, x, rho)
        iterations += 1
    if res_max > EIG_RESIDUAL_TOL:
        raise NumericalError(f"eigen iteration failed to converge, residual {res_max:.3e}")
    return SpectralBounds(lambda_min, rho, iterations, (res_min, res_max))


def optimal_beta(bounds: SpectralBounds, alpha: float) -> ContourParams:
    """Contour scale maximizing the geometric rate, and the rate itself.

    For a single-eigenvalue pencil the rate is unbounded; a finite sentinel
    with the degeneracy flag is reported instead.
    """
    if alpha <= 0:
        raise ValueError(f"contour abscissa must be positive, got {alpha}")
    lo, hi = bounds.lambda_min, bounds.lambda_max
    beta = np.sqrt((alpha + lo) * (alpha + hi))
    denom = -hi - alpha + beta
    if denom == 0.0 or abs(denom) < 1e-14 * beta:
        return ContourParams(alpha, float(beta), ETA_DEGENERATE, degenerate=True)
    eta = abs((-hi - alpha - beta) / denom)
    return ContourParams(alpha, float(beta), float(eta), degenerate=False)


def mobius(s: complex, alpha: float, beta: float) -> complex:
    """Map the half-plane Re{s} > alpha onto the unit disk."""
    s = complex(s)
    if s == complex(alpha - beta):
        raise ValueError("s = alpha - beta is the pole of the Moebius map")
    return (s - alpha - beta) / (s - alpha + beta)


def mobius_inverse(z: complex, alpha: float, beta: float) -> complex:
    """Inverse of :func:`mobius`; z = 1 is its pole."""
    z = complex(z)
    if z == 1:
        raise ValueError("z = 1 is the pole of the inverse Moebius map")
    return alpha - beta * (z + 1) / (z - 1)


def circle_image(eta: float, alpha: float, beta: float) -> tuple[float, float]:
    """Center and radius of the inverse-Moebius image of the circle |z| = eta."""
    if eta <= 0:
        raise ValueError(f"circle radius must be positive, got {eta}")
    if eta == 1.0:
        raise ValueError("eta = 1 maps to the vertical line Re{s} = alpha, not a circle")
    center = alpha + beta * (1.0 + eta**2) / (1.0 - eta**2)
    radius = 2.0 * beta * eta / abs(1.0 - eta**2)
    return center, radius


def lambda_diagnostic(bounds: SpectralBounds, alpha: float, beta: float, eta: float) -> float:
    """Smaller of the two squared clearance terms in the convergence bound."""
    if eta <= 1:
        raise ValueError(f"eta must exceed 1, got {eta}")
    term_hi = (alpha + bounds.lambda_max - beta * (eta - 1.0) / (eta + 1.0)) ** 2
    term_lo = (alpha + bounds.lambda_min - beta * (eta + 1.0) / (eta - 1.0)) ** 2
    return float(min(term_hi, term_lo))
