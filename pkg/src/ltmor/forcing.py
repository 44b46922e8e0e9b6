"""Separable right-hand side f(x, t) = b(t) g(x) and initial conditions.

The time factor b(t) = (theta1*sin(omega*t) + theta2*cos(omega*t)) * exp(nu*t)
has the closed-form Laplace transform

    b_hat(s) = theta1 * omega / ((s-nu)^2 + omega^2)
             + theta2 * (s-nu) / ((s-nu)^2 + omega^2),   Re{s} > nu.

The spatial factor is g(x) = cos(lambda_x * x1) * x1 * (1 + x_d)^2; the 1D
form reuses the 2D formula with x2 := x1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ForcingSpec:
    theta1: float
    theta2: float
    omega: float
    nu: float
    lambda_x: float
    dim: int

    def __post_init__(self):
        for name in ("theta1", "theta2", "omega", "nu", "lambda_x"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"forcing parameter {name} must be finite")
        if self.omega == 0.0 and self.theta1 != 0.0:
            raise ValueError("omega = 0 requires theta1 = 0 (sine term has no transform pole)")
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")


@dataclass(frozen=True)
class InitialConditionSpec:
    kind: str  # "zero" | "sine-product"
    zeta: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.kind not in ("zero", "sine-product"):
            raise ValueError(f"unknown initial-condition kind {self.kind!r}")
        if self.kind == "sine-product":
            if len(self.zeta) == 0 or any(z < 1 for z in self.zeta):
                raise ValueError("sine-product initial condition needs zeta entries >= 1")


def eval_b(spec: ForcingSpec, t: float) -> float:
    """Time factor b(t) for t >= 0."""
    return (spec.theta1 * math.sin(spec.omega * t) + spec.theta2 * math.cos(spec.omega * t)) * math.exp(spec.nu * t)


def eval_b_hat(spec: ForcingSpec, s: complex) -> complex:
    """Closed-form Laplace transform of b, valid for Re{s} > nu."""
    s = complex(s)
    if s.real <= spec.nu:
        raise ValueError(
            f"Laplace variable Re{{s}} = {s.real} is not to the right of the abscissa nu = {spec.nu}"
        )
    z = s - spec.nu
    denom = z * z + spec.omega**2
    return (spec.theta1 * spec.omega + spec.theta2 * z) / denom


def eval_g(spec: ForcingSpec, x: np.ndarray) -> float:
    """Spatial factor g(x); x has spec.dim coordinates."""
    x1 = float(x[0])
    xd = float(x[-1]) if spec.dim == 2 else x1
    return math.cos(spec.lambda_x * x1) * x1 * (1.0 + xd) ** 2


def eval_u0(ic: InitialConditionSpec, x: np.ndarray) -> float:
    """Initial condition: zero, or the product of sin(zeta_i*pi*(x_i - 1/2))."""
    if ic.kind == "zero":
        return 0.0
    out = 1.0
    for zi, xi in zip(ic.zeta, np.atleast_1d(x)):
        out *= math.sin(zi * math.pi * (float(xi) - 0.5))
    return out


def abscissa(spec: ForcingSpec) -> float:
    """Exponential growth rate of b; the Laplace contour must satisfy alpha > nu."""
    return spec.nu
