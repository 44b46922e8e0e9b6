import math

import numpy as np
import pytest
from scipy.integrate import quad

from ltmor.forcing import (
    ForcingSpec,
    InitialConditionSpec,
    abscissa,
    eval_b,
    eval_b_hat,
    eval_g,
    eval_u0,
)

SPEC = ForcingSpec(theta1=1.0, theta2=1.0, omega=10.0, nu=0.5, lambda_x=10.0, dim=1)


def laplace_quadrature(spec, s, horizon=40.0):
    """Truncated numerical Laplace transform of b, the test oracle."""
    re, _ = quad(lambda t: math.exp(-s.real * t) * math.cos(s.imag * t) * eval_b(spec, t),
                 0.0, horizon, limit=400, epsabs=1e-12, epsrel=1e-12)
    im, _ = quad(lambda t: -math.exp(-s.real * t) * math.sin(s.imag * t) * eval_b(spec, t),
                 0.0, horizon, limit=400, epsabs=1e-12, epsrel=1e-12)
    return complex(re, im)


def test_eval_b_at_zero():
    assert eval_b(ForcingSpec(1.0, 1.0, 10.0, 0.5, 10.0, 1), 0.0) == 1.0


def test_eval_b_zero_amplitudes():
    spec = ForcingSpec(0.0, 0.0, 3.0, 0.2, 1.0, 1)
    for t in (0.0, 0.7, 5.0):
        assert eval_b(spec, t) == 0.0


def test_eval_b_quarter_period():
    spec = ForcingSpec(2.0, 0.0, 4.0, 0.3, 1.0, 1)
    t = math.pi / (2 * spec.omega)
    assert abs(eval_b(spec, t) - 2.0 * math.exp(0.3 * t)) <= 1e-14


def test_b_hat_near_abscissa_limit():
    value = eval_b_hat(SPEC, SPEC.nu + 1e-9)
    assert abs(value - 0.1) <= 1e-9


def test_b_hat_cosine_only():
    spec = ForcingSpec(0.0, 1.0, 1.0, 0.25, 1.0, 1)
    assert abs(eval_b_hat(spec, spec.nu + 1.0) - 0.5) <= 1e-15


def test_b_hat_matches_quadrature_oracle():
    rng = np.random.default_rng(5)
    for _ in range(10):
        s = complex(1.5 + 2.5 * rng.random(), 4.0 * rng.standard_normal())
        assert abs(eval_b_hat(SPEC, s) - laplace_quadrature(SPEC, s)) <= 1e-8


def test_b_hat_rejects_left_of_abscissa():
    with pytest.raises(ValueError, match="abscissa"):
        eval_b_hat(SPEC, 0.5)
    with pytest.raises(ValueError, match="abscissa"):
        eval_b_hat(SPEC, complex(0.2, 3.0))


def test_b_hat_conjugate_symmetry():
    rng = np.random.default_rng(17)
    for _ in range(100):
        s = complex(SPEC.nu + 0.1 + 3.0 * rng.random(), 10.0 * rng.standard_normal())
        lhs = eval_b_hat(SPEC, np.conj(s))
        rhs = np.conj(eval_b_hat(SPEC, s))
        assert abs(lhs - rhs) <= 1e-14 * max(1.0, abs(rhs))


def test_eval_g_origin_and_axis():
    assert eval_g(SPEC, np.array([0.0])) == 0.0
    assert eval_g(ForcingSpec(1, 1, 10, 0.5, 10.0, 2), np.array([0.0, 0.3])) == 0.0


def test_eval_g_1d_specialization():
    spec = ForcingSpec(1.0, 1.0, 10.0, 0.5, 0.0, 1)
    assert abs(eval_g(spec, np.array([0.5])) - 0.5 * 1.5**2) <= 1e-15


def test_eval_g_2d_vanishing_factor():
    spec = ForcingSpec(1.0, 1.0, 10.0, 0.5, 10.0, 2)
    assert eval_g(spec, np.array([0.25, -1.0])) == 0.0


def test_eval_u0_zero_kind():
    ic = InitialConditionSpec("zero")
    for x in ([0.0], [0.3, -0.1]):
        assert eval_u0(ic, np.array(x)) == 0.0


def test_eval_u0_single_sine():
    ic = InitialConditionSpec("sine-product", (1,))
    assert abs(eval_u0(ic, np.array([0.0])) + 1.0) <= 1e-15


def test_eval_u0_vanishes_on_square_corners():
    ic = InitialConditionSpec("sine-product", (4, 1))
    for corner in ([0.5, 0.5], [-0.5, 0.5], [0.5, -0.5], [-0.5, -0.5]):
        assert abs(eval_u0(ic, np.array(corner))) <= 1e-12


@pytest.mark.parametrize("nu", [0.5, 0.0, -1.0])
def test_abscissa(nu):
    assert abscissa(ForcingSpec(1.0, 1.0, 2.0, nu, 1.0, 1)) == nu


def test_forcing_spec_validation():
    with pytest.raises(ValueError, match="omega"):
        ForcingSpec(theta1=1.0, theta2=0.0, omega=0.0, nu=0.0, lambda_x=1.0, dim=1)
    with pytest.raises(ValueError, match="finite"):
        ForcingSpec(theta1=math.inf, theta2=0.0, omega=1.0, nu=0.0, lambda_x=1.0, dim=1)
    # omega = 0 is fine once the sine amplitude vanishes
    ForcingSpec(theta1=0.0, theta2=1.0, omega=0.0, nu=-1.0, lambda_x=0.0, dim=1)


def test_initial_condition_validation():
    with pytest.raises(ValueError):
        InitialConditionSpec("sine-product", ())
    with pytest.raises(ValueError):
        InitialConditionSpec("sine-product", (0,))
    with pytest.raises(ValueError):
        InitialConditionSpec("bogus")
