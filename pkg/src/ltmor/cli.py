"""Experiment driver: full-order runs, Laplace-domain reduced runs, the
time-domain POD baseline, spectral reports, and timing breakdowns.

Experiments are described by a single JSON config; command-line flags only
select the subcommand, config path, and output directory.  All numeric CSV
output uses '.' decimals and scientific notation with 17 significant digits,
so repeated runs of one config are byte-identical (timings aside).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from . import fem as fem_mod
from . import forcing as forcing_mod
from .errors import ConfigError, NumericalError
from .laplace import compute_snapshots, make_snapshot_plan
from .mesh import StructuredMesh, build_interval_mesh, build_square_mesh
from .metrics import ErrorReport, relative_error
from .pod import (
    pod_cholesky_svd,
    pod_method_of_snapshots,
    prefer_cholesky_route,
    time_domain_pod,
)
from .rom import Trajectory, backward_euler, lift, project_model
from .spectral import extreme_eigenvalues, optimal_beta

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

TIMING_PHASES = ("assemble_fem", "solve_td_hf", "ld_hf", "build_rb", "solve_td_rb")


@dataclass(frozen=True)
class ExperimentConfig:
    dim: int
    mesh_n: int
    diffusion: float
    forcing: forcing_mod.ForcingSpec
    ic: forcing_mod.InitialConditionSpec
    alpha: float
    beta: float | str  # positive number or "optimal"
    m_values: tuple[int, ...]
    r_max: int
    horizon: float
    n_steps: int
    output_dir: str | None = None


@dataclass
class TimingReport:
    """Wall-clock durations of the paper-style phases, in seconds."""

    assemble_fem: float = 0.0
    solve_td_hf: float = 0.0
    ld_hf: float = 0.0
    build_rb: float = 0.0
    solve_td_rb: float = 0.0

    def rows(self) -> list[tuple[str, float]]:
        return [(name, getattr(self, name)) for name in TIMING_PHASES]


@contextmanager
def _phase(timing: TimingReport, name: str):
    start = time.perf_counter()
    yield
    setattr(timing, name, getattr(timing, name) + time.perf_counter() - start)


def _require(data: dict, key: str, path: str) -> Any:
    if key not in data:
        raise ConfigError(f"{path}: missing required field")
    return data[key]


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse and validate an experiment config; errors name the field."""
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(data)


def parse_config(data: dict) -> ExperimentConfig:
    dim = _require(data, "dim", "dim")
    if dim not in (1, 2):
        raise ConfigError(f"dim: must be 1 or 2, got {dim!r}")
    mesh_n = _require(data, "mesh_n", "mesh_n")
    if not isinstance(mesh_n, int) or mesh_n < 1:
        raise ConfigError(f"mesh_n: must be a positive integer, got {mesh_n!r}")
    diffusion = float(_require(data, "diffusion", "diffusion"))
    if diffusion <= 0:
        raise ConfigError(f"diffusion: must be positive, got {diffusion}")

    fdata = _require(data, "forcing", "forcing")
    try:
        spec = forcing_mod.ForcingSpec(
            theta1=float(_require(fdata, "theta1", "forcing.theta1")),
            theta2=float(_require(fdata, "theta2", "forcing.theta2")),
            omega=float(_require(fdata, "omega", "forcing.omega")),
            nu=float(_require(fdata, "nu", "forcing.nu")),
            lambda_x=float(_require(fdata, "lambda_x", "forcing.lambda_x")),
            dim=dim,
        )
    except ValueError as exc:
        raise ConfigError(f"forcing: {exc}") from exc

    idata = _require(data, "ic", "ic")
    kind = _require(idata, "kind", "ic.kind")
    zeta = tuple(int(z) for z in idata.get("zeta", ()))
    try:
        ic = forcing_mod.InitialConditionSpec(kind=kind, zeta=zeta)
    except ValueError as exc:
        raise ConfigError(f"ic: {exc}") from exc
    if ic.kind == "sine-product" and len(ic.zeta) != dim:
        raise ConfigError(f"ic.zeta: expected {dim} entries for dim={dim}, got {len(ic.zeta)}")

    cdata = _require(data, "contour", "contour")
    alpha = float(_require(cdata, "alpha", "contour.alpha"))
    if alpha <= spec.nu:
        raise ConfigError(
            f"contour.alpha: must exceed the forcing abscissa nu = {spec.nu}, got {alpha}"
        )
    if alpha <= 0:
        raise ConfigError(f"contour.alpha: must be positive, got {alpha}")
    beta = _require(cdata, "beta", "contour.beta")
    if beta != "optimal":
        beta = float(beta)
        if beta <= 0:
            raise ConfigError(f"contour.beta: must be positive or 'optimal', got {beta}")
    m_values = _require(cdata, "m_values", "contour.m_values")
    if not m_values:
        raise ConfigError("contour.m_values: must list at least one node count")
    for i, m in enumerate(m_values):
        if not isinstance(m, int) or m < 4 or m % 2 != 0:
            raise ConfigError(f"contour.m_values[{i}]: must be an even integer >= 4, got {m!r}")

    rdata = _require(data, "rom", "rom")
    r_max = _require(rdata, "r_max", "rom.r_max")
    if not isinstance(r_max, int) or r_max < 1:
        raise ConfigError(f"rom.r_max: must be a positive integer, got {r_max!r}")

    tdata = _require(data, "time", "time")
    horizon = float(_require(tdata, "horizon", "time.horizon"))
    if horizon <= 0:
        raise ConfigError(f"time.horizon: must be positive, got {horizon}")
    n_steps = _require(tdata, "steps", "time.steps")
    if not isinstance(n_steps, int) or n_steps < 1:
        raise ConfigError(f"time.steps: must be a positive integer, got {n_steps!r}")

    return ExperimentConfig(
        dim=dim,
        mesh_n=mesh_n,
        diffusion=diffusion,
        forcing=spec,
        ic=ic,
        alpha=alpha,
        beta=beta,
        m_values=tuple(m_values),
        r_max=r_max,
        horizon=horizon,
        n_steps=n_steps,
        output_dir=data.get("output_dir"),
    )


@dataclass(frozen=True)
class Problem:
    """Assembled ingredients shared by every run mode."""

    mesh: StructuredMesh
    fem: fem_mod.FemOperators
    g_h: np.ndarray
    u0_h: np.ndarray
    config: ExperimentConfig

    def b_of_t(self, t: float) -> float:
        return forcing_mod.eval_b(self.config.forcing, t)

    def b_hat(self, s: complex) -> complex:
        return forcing_mod.eval_b_hat(self.config.forcing, s)


def build_problem(config: ExperimentConfig, u0_h: np.ndarray | None = None) -> Problem:
    mesh = build_interval_mesh(config.mesh_n) if config.dim == 1 else build_square_mesh(config.mesh_n)
    operators = fem_mod.assemble_operators(mesh, config.diffusion)
    g_h = fem_mod.assemble_load(mesh, operators, lambda x: forcing_mod.eval_g(config.forcing, x))
    if u0_h is None:
        u0_h = fem_mod.interpolate(mesh, lambda x: forcing_mod.eval_u0(config.ic, x))
    return Problem(mesh, operators, g_h, u0_h, config)


def _fmt(value: float) -> str:
    return f"{value:.16e}"


def _write_csv(path: Path, header: str, rows) -> None:
    lines = [header]
    for row in rows:
        lines.append(",".join(str(c) if isinstance(c, (int, str)) else _fmt(c) for c in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_timings(out_dir: Path, timing: TimingReport) -> None:
    _write_csv(out_dir / "timings.csv", "phase,seconds", timing.rows())


def _resolve_beta(config: ExperimentConfig, operators: fem_mod.FemOperators) -> float:
    if config.beta == "optimal":
        bounds = extreme_eigenvalues(operators)
        return optimal_beta(bounds, config.alpha).beta_opt
    return float(config.beta)


def run_fom(
    config: ExperimentConfig,
    out_dir: str | Path,
    store_trajectory: bool = False,
) -> tuple[Trajectory, TimingReport]:
    """Solve the full-order model and persist its trajectory and timings."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    timing = TimingReport()
    with _phase(timing, "assemble_fem"):
        problem = build_problem(config)
    with _phase(timing, "solve_td_hf"):
        traj = backward_euler(
            problem.fem.mass,
            problem.fem.stiffness,
            problem.g_h,
            problem.b_of_t,
            problem.u0_h,
            config.horizon,
            config.n_steps,
        )
    np.savez(out / "trajectory.npz", t_grid=traj.t_grid, states=traj.states)
    if store_trajectory:
        probes = np.linspace(0, problem.fem.n_free - 1, min(8, problem.fem.n_free)).astype(int)
        rows = [
            tuple([float(t)] + [float(v) for v in traj.states[j, probes]])
            for j, t in enumerate(traj.t_grid)
        ]
        header = "t," + ",".join(f"node_{p}" for p in probes)
        _write_csv(out / "trajectory.csv", header, rows)
    _write_timings(out, timing)
    return traj, timing


# Below this value the fast projected-coordinate error formula loses digits
# to cancellation and the error is recomputed from explicit state differences.
_EXACT_ERROR_THRESHOLD = 1e-6


def _errors_for_basis(
    problem: Problem,
    basis_phi: np.ndarray,
    reference: Trajectory,
    r_limit: int,
    timing: TimingReport,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """R-sweep of relative errors in both norms; times the largest-R stepping.

    ||u - Phi c||^2_X expands into precomputed projections of the reference,
    which avoids lifting every reduced trajectory to full size; errors small
    enough to suffer cancellation are recomputed exactly.
    """
    config = problem.config
    r_values = np.arange(1, r_limit + 1)
    errors = {"l2": np.empty(r_limit), "h1": np.empty(r_limit)}
    norms = {"l2": problem.fem.mass, "h1": problem.fem.energy}
    phi = basis_phi[:, :r_limit]
    ref_states = reference.states
    ref_energy = {}
    cross = {}
    grams = {}
    for key, x_matrix in norms.items():
        x_ref = x_matrix @ ref_states.T  # (N, Nt+1)
        ref_energy[key] = np.einsum("ji,ij->j", ref_states, x_ref)
        cross[key] = phi.T @ x_ref  # (r_limit, Nt+1)
        grams[key] = phi.T @ (x_matrix @ phi)
        if np.sum(ref_energy[key]) == 0.0:
            raise ValueError("reference trajectory is identically zero; relative error undefined")

    for idx, r in enumerate(r_values):
        phi_r = basis_phi[:, :r]
        reduced = project_model(problem.fem, phi_r, problem.g_h, problem.u0_h)
        is_largest = r == r_values[-1]
        start = time.perf_counter()
        traj_r = backward_euler(
            reduced.mass_r,
            reduced.stiff_r,
            reduced.load_r,
            problem.b_of_t,
            reduced.c0,
            config.horizon,
            config.n_steps,
            space_tag="reduced",
        )
        if is_largest:
            timing.solve_td_rb += time.perf_counter() - start
        coeffs = traj_r.states
        lifted = None
        for key in norms:
            diff_sq = (
                ref_energy[key]
                - 2.0 * np.einsum("jk,kj->j", coeffs, cross[key][:r])
                + np.einsum("jk,jk->j", coeffs @ grams[key][:r, :r], coeffs)
            )
            err = float(np.sqrt(max(np.sum(diff_sq), 0.0) / np.sum(ref_energy[key])))
            if err < _EXACT_ERROR_THRESHOLD:
                if lifted is None:
                    lifted = lift(phi_r, traj_r)
                err = relative_error(reference, lifted, norms[key])
            errors[key][idx] = err
    return r_values, errors["l2"], errors["h1"]


def run_ltmor(
    config: ExperimentConfig,
    out_dir: str | Path,
    u0_h: np.ndarray | None = None,
) -> tuple[list[ErrorReport], TimingReport]:
    """Laplace-domain offline phase plus the reduced online sweep, per M.

    Errors are measured against the full-order trajectory on the identical
    time grid.  ``u0_h`` overrides the configured initial condition with an
    explicit nodal field (used by eigenmode studies).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    timing = TimingReport()
    with _phase(timing, "assemble_fem"):
        problem = build_problem(config, u0_h=u0_h)
    with _phase(timing, "solve_td_hf"):
        reference = backward_euler(
            problem.fem.mass,
            problem.fem.stiffness,
            problem.g_h,
            problem.b_of_t,
            problem.u0_h,
            config.horizon,
            config.n_steps,
        )
    beta = _resolve_beta(config, problem.fem)

    reports: list[ErrorReport] = []
    error_rows: list[tuple] = []
    sigma_rows: list[tuple] = []
    for m in config.m_values:
        plan = make_snapshot_plan(config.alpha, beta, m)
        try:
            with _phase(timing, "ld_hf"):
                snapshots = compute_snapshots(
                    plan, problem.fem, problem.g_h, problem.u0_h, problem.b_hat
                )
            with _phase(timing, "build_rb"):
                if prefer_cholesky_route(problem.fem.n_free, m):
                    basis = pod_cholesky_svd(
                        snapshots.columns, snapshots.weights, problem.fem.energy
                    )
                else:
                    basis = pod_method_of_snapshots(
                        snapshots.columns, snapshots.weights, problem.fem.energy
                    )
            r_limit = min(config.r_max, basis.r_rank)
            r_values, err_l2, err_h1 = _errors_for_basis(
                problem, basis.phi, reference, r_limit, timing
            )
        except NumericalError as exc:
            raise NumericalError(f"LT-MOR run failed at M = {m}: {exc}") from exc
        report = ErrorReport(
            r_values=r_values,
            err_l2=err_l2,
            err_h1=err_h1,
            sigma=basis.sigma,
            metadata={
                "m": m,
                "alpha": config.alpha,
                "beta": beta,
                "mesh_n": config.mesh_n,
                "dim": config.dim,
                "n_steps": config.n_steps,
                "horizon": config.horizon,
                "r_max_truncated": bool(config.r_max > basis.r_rank),
            },
        )
        reports.append(report)
        error_rows.extend((m, r, e2, e1) for r, e2, e1 in report.rows())
        sigma_rows.extend((m, k + 1, s) for k, s in enumerate(basis.sigma))

    _write_csv(out / "errors.csv", "M,R,err_L2,err_H1", error_rows)
    _write_csv(out / "singular_values.csv", "M,k,sigma", sigma_rows)
    (out / "report.json").write_text(
        json.dumps([r.to_dict() for r in reports], indent=2), encoding="utf-8"
    )
    _write_timings(out, timing)
    return reports, timing


def run_baseline_pod(config: ExperimentConfig, out_dir: str | Path) -> ErrorReport:
    """Time-domain POD of the full-order trajectory, same R sweep and errors.

    Reported for comparison only; building this basis already requires the
    full-order solve it would replace.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    timing = TimingReport()
    with _phase(timing, "assemble_fem"):
        problem = build_problem(config)
    with _phase(timing, "solve_td_hf"):
        reference = backward_euler(
            problem.fem.mass,
            problem.fem.stiffness,
            problem.g_h,
            problem.b_of_t,
            problem.u0_h,
            config.horizon,
            config.n_steps,
        )
    if not np.any(reference.states):
        raise ConfigError(
            "time-domain POD baseline needs a nonzero trajectory "
            "(forcing and initial condition are both zero)"
        )
    with _phase(timing, "build_rb"):
        basis = time_domain_pod(reference, problem.fem.energy)
    r_limit = min(config.r_max, basis.r_rank)
    r_values, err_l2, err_h1 = _errors_for_basis(problem, basis.phi, reference, r_limit, timing)
    report = ErrorReport(
        r_values=r_values,
        err_l2=err_l2,
        err_h1=err_h1,
        sigma=basis.sigma,
        metadata={
            "baseline": "time-domain-pod",
            "mesh_n": config.mesh_n,
            "dim": config.dim,
            "n_steps": config.n_steps,
            "horizon": config.horizon,
        },
    )
    _write_csv(out / "baseline_errors.csv", "R,err_L2,err_H1", report.rows())
    _write_timings(out, timing)
    return report


def eig_report(config: ExperimentConfig, out_dir: str | Path) -> dict:
    """Extreme eigenvalues and the optimal contour parameters, as JSON."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    problem = build_problem(config)
    bounds = extreme_eigenvalues(problem.fem)
    params = optimal_beta(bounds, config.alpha)
    payload = {
        "lambda_min": bounds.lambda_min,
        "lambda_max": bounds.lambda_max,
        "iterations": bounds.iterations,
        "residuals": list(bounds.residuals),
        "alpha": params.alpha,
        "beta_opt": params.beta_opt,
        "eta_opt": params.eta_opt,
        "degenerate": params.degenerate,
    }
    (out / "eig_report.json").write_text(json.dumps(payload, indent=2), encoding="utf-8")
    return payload


def sweep(config: ExperimentConfig, out_dir: str | Path, store_trajectory: bool = False) -> None:
    """Full study: FOM, LT-MOR sweep, baseline POD, and the spectral report."""
    out = Path(out_dir)
    run_fom(config, out / "fom", store_trajectory=store_trajectory)
    run_ltmor(config, out / "ltmor")
    run_baseline_pod(config, out / "baseline")
    eig_report(config, out / "eig")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="ltmor", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run-fom", "run-ltmor", "run-baseline-pod", "eig-report", "sweep"):
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="path to the JSON experiment config")
        cmd.add_argument("--out", default=None, help="output directory")
        cmd.add_argument("--store-trajectory", action="store_true",
                         help="also export the trajectory as CSV (run-fom, sweep)")
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config)
        out_dir = args.out or config.output_dir
        if out_dir is None:
            raise ConfigError("output_dir: set it in the config or pass --out")
        if args.command == "run-fom":
            run_fom(config, out_dir, store_trajectory=args.store_trajectory)
        elif args.command == "run-ltmor":
            run_ltmor(config, out_dir)
        elif args.command == "run-baseline-pod":
            run_baseline_pod(config, out_dir)
        elif args.command == "eig-report":
            eig_report(config, out_dir)
        else:
            sweep(config, out_dir, store_trajectory=args.store_trajectory)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
