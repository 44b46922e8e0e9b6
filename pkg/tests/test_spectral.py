import math

import numpy as np
import pytest
import scipy.linalg as sla

import ltmor.spectral as spectral
from ltmor.errors import NumericalError
from ltmor.fem import assemble_operators
from ltmor.mesh import build_interval_mesh, build_square_mesh
from ltmor.spectral import (
    ETA_DEGENERATE,
    SpectralBounds,
    circle_image,
    extreme_eigenvalues,
    lambda_diagnostic,
    mobius,
    mobius_inverse,
    optimal_beta,
)


def test_scalar_pencil_interval_n2():
    fem = assemble_operators(build_interval_mesh(2), 1.0)
    bounds = extreme_eigenvalues(fem)
    assert abs(bounds.lambda_min - 12.0) <= 1e-12
    assert abs(bounds.lambda_max - 12.0) <= 1e-12


def test_interval_n16_matches_dense_oracle():
    fem = assemble_operators(build_interval_mesh(16), 1.0)
    bounds = extreme_eigenvalues(fem)
    vals = sla.eigh(fem.stiffness.toarray(), fem.mass.toarray(), eigvals_only=True)
    assert abs(bounds.lambda_min - vals[0]) <= 1e-8 * vals[0]
    assert abs(bounds.lambda_max - vals[-1]) <= 1e-8 * vals[-1]
    assert abs(bounds.lambda_min - math.pi**2) / math.pi**2 <= 0.01


def test_eigenvalues_scale_linearly_in_diffusion():
    mesh = build_interval_mesh(16)
    one = extreme_eigenvalues(assemble_operators(mesh, 1.0))
    three = extreme_eigenvalues(assemble_operators(mesh, 3.0))
    assert abs(three.lambda_min - 3 * one.lambda_min) <= 1e-10 * three.lambda_min
    assert abs(three.lambda_max - 3 * one.lambda_max) <= 1e-10 * three.lambda_max


def test_square_n16_iterative_path():
    fem = assemble_operators(build_square_mesh(16), 1.0)
    assert fem.n_free == 225  # above the dense-fallback limit
    bounds = extreme_eigenvalues(fem)
    vals = sla.eigh(fem.stiffness.toarray(), fem.mass.toarray(), eigvals_only=True)
    assert abs(bounds.lambda_min - vals[0]) <= 1e-8 * vals[0]
    assert abs(bounds.lambda_max - vals[-1]) <= 1e-8 * vals[-1]
    assert abs(bounds.lambda_min - 2 * math.pi**2) / (2 * math.pi**2) <= 0.03
    assert max(bounds.residuals) <= 1e-8
    assert bounds.iterations > 0


def test_iteration_cap_raises(monkeypatch):
    fem = assemble_operators(build_square_mesh(16), 1.0)
    monkeypatch.setattr(spectral, "EIG_MAX_ITER", 0)
    with pytest.raises(NumericalError):
        extreme_eigenvalues(fem)


def test_rayleigh_quotients_bracketed():
    fem = assemble_operators(build_square_mesh(16), 1.0)
    bounds = extreme_eigenvalues(fem)
    rng = np.random.default_rng(41)
    eps = 1e-6 * bounds.lambda_max
    for _ in range(20):
        v = rng.standard_normal(fem.n_free)
        rho = (v @ (fem.stiffness @ v)) / (v @ (fem.mass @ v))
        assert bounds.lambda_min - eps <= rho <= bounds.lambda_max + eps


def test_optimal_beta_degenerate_pencil():
    bounds = SpectralBounds(12.0, 12.0, 0, (0.0, 0.0))
    params = optimal_beta(bounds, 1.0)
    assert params.degenerate
    assert abs(params.beta_opt - 13.0) <= 1e-12
    assert params.eta_opt == ETA_DEGENERATE
    assert math.isfinite(params.eta_opt)


def test_optimal_beta_reference_values():
    bounds = SpectralBounds(1.0, 4.0, 0, (0.0, 0.0))
    params = optimal_beta(bounds, 1.0)
    beta = math.sqrt((1.0 + 1.0) * (1.0 + 4.0))
    eta = abs((-4.0 - 1.0 - beta) / (-4.0 - 1.0 + beta))
    assert abs(params.beta_opt - beta) <= 1e-12
    assert abs(params.eta_opt - eta) <= 1e-12
    assert not params.degenerate


def test_eta_exceeds_one_for_separated_spectra():
    rng = np.random.default_rng(42)
    for _ in range(20):
        lo = rng.random() * 5 + 0.1
        hi = lo * (1 + rng.random() * 10 + 1e-3)
        params = optimal_beta(SpectralBounds(lo, hi, 0, (0.0, 0.0)), 1.0)
        assert params.eta_opt > 1.0


def test_mobius_special_points():
    assert mobius(3.0, 1.0, 2.0) == 0.0
    assert mobius_inverse(-1.0, 1.0, 2.0) == 1.0


def test_mobius_round_trip_random():
    rng = np.random.default_rng(43)
    alpha, beta = 1.0, 2.0
    for _ in range(100):
        s = complex(alpha + 4 * rng.random(), 8 * rng.standard_normal())
        back = mobius_inverse(mobius(s, alpha, beta), alpha, beta)
        assert abs(back - s) <= 1e-13 * max(1.0, abs(s))


def test_mobius_pole_inputs_rejected():
    with pytest.raises(ValueError, match="pole"):
        mobius(-1.0, 1.0, 2.0)
    with pytest.raises(ValueError, match="pole"):
        mobius_inverse(1.0, 1.0, 2.0)


def test_mobius_maps_contour_to_unit_circle():
    rng = np.random.default_rng(44)
    for _ in range(50):
        tau = 50 * rng.standard_normal()
        z = mobius(complex(1.0, tau), 1.0, 2.0)
        assert abs(abs(z) - 1.0) <= 1e-13


def test_circle_image_values():
    center, radius = circle_image(2.0, 1.0, 2.0)
    assert abs(center - (-7.0 / 3.0)) <= 1e-12
    assert abs(radius - 8.0 / 3.0) <= 1e-12


def test_circle_image_small_eta_limit():
    center, radius = circle_image(1e-8, 1.0, 2.0)
    assert abs(center - 3.0) <= 1e-7
    assert radius <= 1e-7


def test_circle_image_consistent_with_inverse_map():
    eta, alpha, beta = 2.0, 1.0, 2.0
    center, radius = circle_image(eta, alpha, beta)
    for theta in np.linspace(0, 2 * math.pi, 64, endpoint=False):
        s = mobius_inverse(eta * np.exp(1j * theta), alpha, beta)
        assert abs(abs(s - center) - radius) <= 1e-12


def test_circle_image_rejects_unit_radius():
    with pytest.raises(ValueError):
        circle_image(1.0, 1.0, 2.0)
    with pytest.raises(ValueError):
        circle_image(-2.0, 1.0, 2.0)


def test_lambda_diagnostic_zero_beta():
    bounds = SpectralBounds(1.0, 4.0, 0, (0.0, 0.0))
    value = lambda_diagnostic(bounds, 1.0, 0.0, 2.0)
    assert abs(value - (1.0 + 1.0) ** 2) <= 1e-14


def test_lambda_diagnostic_reference_case():
    bounds = SpectralBounds(1.0, 4.0, 0, (0.0, 0.0))
    alpha, beta, eta = 1.0, math.sqrt(10.0), 2.0
    term_hi = (alpha + 4.0 - beta * (eta - 1) / (eta + 1)) ** 2
    term_lo = (alpha + 1.0 - beta * (eta + 1) / (eta - 1)) ** 2
    assert abs(lambda_diagnostic(bounds, alpha, beta, eta) - min(term_hi, term_lo)) <= 1e-14


def test_lambda_diagnostic_nonnegative_and_requires_eta():
    rng = np.random.default_rng(45)
    for _ in range(25):
        lo = rng.random() * 3 + 0.1
        bounds = SpectralBounds(lo, lo + rng.random() * 50, 0, (0.0, 0.0))
        value = lambda_diagnostic(bounds, rng.random() + 0.1, rng.random() * 5,
                                  1.0 + rng.random() * 4 + 1e-6)
        assert value >= 0.0
    with pytest.raises(ValueError):
        lambda_diagnostic(SpectralBounds(1.0, 2.0, 0, (0.0, 0.0)), 1.0, 1.0, 1.0)
