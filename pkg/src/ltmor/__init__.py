"""Laplace-transform model order reduction for linear parabolic problems.

Workflow: assemble P1 operators on a structured mesh, sample the shifted
elliptic problem on a cotangent contour in the Laplace domain, extract a
B-orthonormal reduced basis by weighted POD, then time-step the Galerkin
projection with backward Euler.
"""

from .errors import ConfigError, NumericalError
from .fem import FemOperators, assemble_load, assemble_operators, interpolate, project_h1
from .forcing import (
    ForcingSpec,
    InitialConditionSpec,
    abscissa,
    eval_b,
    eval_b_hat,
    eval_g,
    eval_u0,
)
from .laplace import (
    SnapshotPlan,
    SnapshotSet,
    compute_snapshots,
    make_snapshot_plan,
    solve_shifted,
)
from .mesh import StructuredMesh, build_interval_mesh, build_square_mesh
from .metrics import (
    ErrorReport,
    hardy_quadrature_error,
    paley_wiener_check,
    relative_error,
    weighted_time_norm,
)
from .pod import (
    ReducedBasis,
    pod_cholesky_svd,
    pod_complex,
    pod_method_of_snapshots,
    pod_residual,
    prefer_cholesky_route,
    principal_angles,
    time_domain_pod,
)
from .rom import ReducedModel, Trajectory, backward_euler, lift, project_model
from .spectral import (
    ContourParams,
    SpectralBounds,
    circle_image,
    extreme_eigenvalues,
    lambda_diagnostic,
    mobius,
    mobius_inverse,
    optimal_beta,
)

__all__ = [name for name in dir() if not name.startswith("_")]
