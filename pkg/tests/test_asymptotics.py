import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from pairtest.asymptotics import (
    DegenerateVarianceWarning,
    clt_standardize,
    constants,
    derivative_check,
    lln_deviation,
    log_alpha0,
    log_alpha0_prime,
    rate,
    tail_exponent,
)
from pairtest.analytic import closed_form_moments
from pairtest.model import new_model
from pairtest.simulator import monte_carlo

M3 = new_model(0.3)


def test_constants_at_point_three():
    c = constants(M3)
    assert c.mu == pytest.approx(1.51 / 1.7, rel=1e-15)
    assert c.sigma2 == pytest.approx(0.21 * 9.313 / 4.913, rel=1e-14)
    assert c.sigma2 == pytest.approx(0.3980725, abs=1e-7)


def test_constants_limits():
    assert constants(new_model(1 - 1e-12)).mu == pytest.approx(2.0, abs=1e-11)
    assert constants(new_model(1e-12)).mu == pytest.approx(0.5, abs=1e-11)


@given(st.floats(1e-6, 1 - 1e-6))
def test_constants_ranges(p):
    c = constants(new_model(p))
    assert 0.5 <= c.mu <= 2 and c.sigma2 > 0


def test_log_alpha0_at_zero():
    assert log_alpha0(M3, 0.0) == pytest.approx(0.0, abs=1e-15)


def test_log_alpha0_asymptotes():
    assert log_alpha0(M3, 200.0) - (400.0 + math.log(0.3)) == pytest.approx(0.0, abs=1e-12)
    # as lam -> -inf, Lam(lam) ~ lam/2 + log q
    assert log_alpha0(M3, -200.0) - (-100.0 + math.log(0.7)) == pytest.approx(0.0, abs=1e-12)
    h = 1e-4
    slope = (log_alpha0(M3, -30 + h) - log_alpha0(M3, -30 - h)) / (2 * h)
    assert slope == pytest.approx(0.5, abs=1e-6)
    assert log_alpha0_prime(M3, 40.0) == pytest.approx(2.0, abs=1e-12)


def test_analytic_slope_matches_finite_differences():
    for lam in np.linspace(-8, 8, 33):
        h = 1e-6
        fd = (log_alpha0(M3, lam + h) - log_alpha0(M3, lam - h)) / (2 * h)
        assert log_alpha0_prime(M3, lam) == pytest.approx(fd, abs=1e-8)


def test_convexity():
    grid = np.linspace(-10, 10, 2001)
    vals = np.array([log_alpha0(M3, lam) for lam in grid])
    assert (np.diff(vals, 2) >= -1e-9).all()


@pytest.mark.parametrize("p", [0.1, 0.3, 0.35, 0.5, 0.9])
def test_derivatives_at_zero(p):
    m = new_model(p)
    c = constants(m)
    d1, d2 = derivative_check(m)
    assert abs(d1 - c.mu) <= 1e-5
    assert abs(d2 - c.sigma2) <= 1e-3


def test_rate_zero_at_mean():
    r = rate(M3, constants(M3).mu)
    assert r.rate == pytest.approx(0.0, abs=1e-12) and r.lambda_star == 0.0 and r.converged


def test_rate_local_quadratic():
    c = constants(M3)
    for delta in (0.02, 0.005, 0.001):
        r = rate(M3, c.mu + delta)
        assert r.rate == pytest.approx(delta**2 / (2 * c.sigma2), rel=0.1)
    r = rate(M3, c.mu + 1e-3)
    assert r.rate == pytest.approx(1e-6 / (2 * c.sigma2), rel=0.01)


@given(st.floats(0.5001, 1.9999))
def test_rate_solver_residual(x):
    r = rate(M3, x)
    assert r.converged and not r.boundary
    assert abs(log_alpha0_prime(M3, r.lambda_star) - x) <= 1e-10
    assert r.rate >= 0


def test_rate_outside_domain():
    for x in (0.3, 0.49, 2.01, 5.0):
        r = rate(M3, x)
        assert r.rate == math.inf


def test_rate_at_endpoints():
    lo, hi = rate(M3, 0.5), rate(M3, 2.0)
    assert lo.boundary and hi.boundary
    # P(T_n = n/2) = q^n and P(T_n = 2n-1) = p^(n-1)
    assert lo.rate == pytest.approx(-math.log(0.7), abs=1e-4)
    assert hi.rate == pytest.approx(-math.log(0.3), abs=1e-4)


def test_rate_duality():
    rng = np.random.default_rng(4)
    for x in np.linspace(0.55, 1.95, 15):
        r = rate(M3, x)
        probes = rng.uniform(-10, 10, 100)
        other = x * probes - np.array([log_alpha0(M3, lam) for lam in probes])
        assert (r.rate >= other - 1e-12).all()


def test_rate_convex_in_x():
    xs = np.linspace(0.52, 1.98, 147)
    vals = np.array([rate(M3, x).rate for x in xs])
    assert (np.diff(vals, 2) >= -1e-9).all()


def test_tail_exponent_approaches_rate():
    I = rate(M3, 1.5).rate
    gaps = [abs(tail_exponent(M3, n, 1.5) - I) for n in (500, 1000, 2000)]
    assert gaps[-1] <= 2e-2
    assert gaps[1] <= gaps[0] + 1e-3 and gaps[2] <= gaps[1] + 1e-3


@pytest.mark.parametrize("n", [10, 50, 200, 1000])
def test_lln_deviation_formula(n):
    m = M3
    c = constants(m)
    mean = closed_form_moments(m, n).mean
    assert mean / n - c.mu == pytest.approx(lln_deviation(m, n), abs=1e-13)
    assert abs(lln_deviation(m, n)) < 2 / n


def test_lln_deviation_fits_c_over_n():
    ns = np.arange(10, 2001)
    C = max(abs(lln_deviation(M3, int(n))) * n for n in ns)
    assert math.isfinite(C) and C < 2


def test_clt_standardize_variance():
    c = constants(M3)
    s = monte_carlo(M3, 100, 50_000, seed=3)
    z = clt_standardize(s, c, 100)
    assert z.shape == (50_000,)
    assert np.var(z, ddof=1) == pytest.approx(1.0, rel=0.05)


def test_clt_standardize_rejects_wrong_n():
    s = monte_carlo(M3, 10, 10, seed=0)
    with pytest.raises(ValueError):
        clt_standardize(s, constants(M3), 11)


def test_clt_standardize_degenerate():
    m = new_model(1 - 1e-13)
    c = constants(m)
    assert c.sigma2 < 1e-12
    s = monte_carlo(m, 50, 20, seed=0)
    with pytest.warns(DegenerateVarianceWarning):
        z = clt_standardize(s, c, 50)
    # T = 2n - 1 on every draw, so sqrt(n) (T/n - mu) = -1/sqrt(n)
    assert np.allclose(z, -1 / math.sqrt(50), atol=1e-9)


def test_clt_ks_moderate_n():
    c = constants(M3)
    s = monte_carlo(M3, 1000, 20_000, seed=1)
    z = clt_standardize(s, c, 1000)
    assert stats.kstest(z, "norm").statistic < 0.03
