import math

import numpy as np
import pytest
import scipy.integrate

import ulamtail as ut
from ulamtail.errors import ConfigError, DomainError, NonMonotoneError, OutOfRangeError

# 3 tanh(1/2) + 0.2 to 50 digits
TANH_EVAL = 1.5863514717800292755


def test_tanh_affine_pointwise():
    m = ut.tanh_affine(3.0, 0.2)
    assert ut.eval_map(m, 1.0, 1.0) == pytest.approx(TANH_EVAL, abs=1e-15)
    assert ut.eval_map(m, 1.0, -1.0) == pytest.approx(TANH_EVAL - 0.4, abs=1e-15)
    assert ut.extremal(m, "+", 1.0) == ut.eval_map(m, 1.0, 1.0)
    assert ut.extremal(m, "-", 1.0) == ut.eval_map(m, 1.0, -1.0)


def test_affine_pointwise():
    m = ut.affine(0.5, 1.0)
    for x in (-1.3, 0.0, 0.7):
        for w in (-1.0, -0.25, 0.5, 1.0):
            assert ut.eval_map(m, x, w) == pytest.approx(0.5 * x + w, abs=1e-15)


def test_power_nonhyp_pointwise():
    m = ut.power_nonhyp(1.0, 2, 0.1)
    x = -0.2
    assert ut.extremal(m, "+", x) == pytest.approx(x + x * x, abs=1e-15)
    assert ut.extremal(m, "-", x) == pytest.approx(x + x * x - 0.2, abs=1e-15)


def test_affine_contraction_required():
    with pytest.raises(ConfigError):
        ut.affine(1.0, 0.5)
    with pytest.raises(ConfigError):
        ut.affine(-0.1, 0.5)
    with pytest.raises(ConfigError):
        ut.affine(0.5, 0.0)


def test_eval_domain_checks():
    m = ut.power_nonhyp(1.0, 2, 0.1)
    with pytest.raises(DomainError):
        ut.eval_map(m, -0.6, 0.0)
    with pytest.raises(DomainError):
        ut.eval_map(m, -0.2, 1.5)


def test_section_inverse_round_trip():
    maps = [ut.tanh_affine(3.0, 0.3), ut.affine(0.7, 0.5), ut.power_nonhyp(2.0, 3, 0.05)]
    rng = np.random.default_rng(3)
    for m in maps:
        lo, hi = m.domain
        xs = rng.uniform(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo), size=25)
        ws = rng.uniform(-1.0, 1.0, size=25)
        for x, w in zip(xs, ws):
            y = ut.eval_map(m, x, w)
            assert ut.section_inverse(m, x, y) == pytest.approx(w, abs=1e-10)


def test_section_inverse_out_of_range():
    m = ut.affine(0.5, 1.0)
    with pytest.raises(OutOfRangeError):
        ut.section_inverse(m, 0.0, 1.5)
    assert ut.section_inverse_clipped(m, 0.0, 1.5) == 1.0
    assert ut.section_inverse_clipped(m, 0.0, -7.0) == -1.0


def test_extremal_bounds_eval():
    m = ut.tanh_affine(4.0, 0.6)
    for x in np.linspace(-3.0, 3.0, 11):
        lo = ut.extremal(m, "-", x)
        hi = ut.extremal(m, "+", x)
        for w in np.linspace(-1.0, 1.0, 9):
            y = ut.eval_map(m, x, w)
            assert lo - 1e-12 <= y <= hi + 1e-12


def test_partials_analytic():
    b, sigma = 3.0, 0.25
    m = ut.tanh_affine(b, sigma)
    for x in (-1.5, 0.3, 2.0):
        d = ut.partials(m, x, 0.4)
        want_dx = 0.5 * b / math.cosh(0.5 * x) ** 2
        assert d.dx == pytest.approx(want_dx, rel=1e-9)
        assert d.domega == pytest.approx(sigma, rel=1e-9)


def test_extremal_derivative_orders():
    sigma_star, x_tan = ut.bifurcation_parameter(3.0)
    m = ut.tanh_affine(3.0, sigma_star)
    # first derivative 1 at the tangency, second sqrt(1/3)
    assert ut.extremal_derivative(m, "+", x_tan, 1) == pytest.approx(1.0, abs=1e-10)
    assert ut.extremal_derivative(m, "+", x_tan, 2) == pytest.approx(
        0.57735026918962576451, abs=1e-8
    )


def test_transition_density_integrates_to_one():
    m = ut.tanh_affine(3.0, 0.4)
    noise = ut.poly_symmetric_noise(1)
    for x in (-2.0, -0.5, 1.1):
        lo = ut.extremal(m, "-", x)
        hi = ut.extremal(m, "+", x)
        quad, _ = scipy.integrate.quad(
            lambda y: float(ut.transition_density(m, noise, x, y)), lo, hi, limit=200
        )
        assert quad == pytest.approx(1.0, abs=1e-8)


def test_user_tabulated_and_h1():
    m = ut.user_tabulated(lambda x, w: 0.5 * x + 0.3 * w, domain=(-2.0, 2.0))
    assert ut.validate_h1(m)
    assert ut.eval_map(m, 1.0, 0.5) == pytest.approx(0.65, abs=1e-14)
    bad = ut.user_tabulated(lambda x, w: 0.5 * x - 0.3 * w, domain=(-2.0, 2.0))
    with pytest.raises(NonMonotoneError):
        ut.validate_h1(bad)


def test_non_monotone_rejected_by_inverse():
    bad = ut.user_tabulated(lambda x, w: 0.5 * x - 0.3 * w, domain=(-2.0, 2.0))
    with pytest.raises((NonMonotoneError, OutOfRangeError)):
        ut.section_inverse(bad, 0.0, 0.1)
