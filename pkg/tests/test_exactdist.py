import math
import time
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pairtest._validation import CapacityError
from pairtest.analytic import mgf
from pairtest.exactdist import (
    PmfTable,
    exact_pmf,
    exact_pmf_log,
    generating_polynomial,
    kappa_poly,
    moments_from_pmf,
)
from pairtest.model import new_model

P_GRID = [0.05, 0.3, 0.35, 0.382, 0.7]


def test_kappa_base_cases():
    m = new_model(0.3)
    assert kappa_poly(m, 0).offset is None
    assert kappa_poly(m, 1).coeffs.tolist() == [1.0]
    assert kappa_poly(m, 2).coeffs.tolist() == [0.0, 0.0, 0.3]


def test_kappa_three_steps_exact():
    m = new_model(Fraction(3, 10))
    p, q = m.p, m.q
    # kappa_3 = p x^2 kappa_2 + q x (q + p x) kappa_1 = q^2 x + pq x^2 + p^2 x^4
    assert kappa_poly(m, 3).coeffs.tolist() == [0, q * q, p * q, 0, p * p]


@pytest.mark.parametrize("n", range(1, 12))
def test_kappa_degree(n):
    assert kappa_poly(new_model(0.3), n).degree == 2 * (n - 1)


@pytest.mark.parametrize("n", range(0, 10))
def test_kappa_poly_evaluates_to_scalar_kappa(n):
    from pairtest.analytic import kappa_scalar

    m = new_model(0.35)
    for lam in (-0.4, 0.0, 0.3):
        assert kappa_poly(m, n)(math.exp(lam)) == pytest.approx(kappa_scalar(m, n, lam), rel=1e-12, abs=1e-300)


def test_kappa_log_domain_matches_plain():
    m = new_model(0.3)
    plain = kappa_poly(m, 40)
    logp = kappa_poly(m, 40, log_domain=True)
    mask = plain.coeffs > 0
    assert np.array_equal(mask, logp.coeffs > -np.inf)
    assert np.allclose(np.exp(logp.coeffs[mask]), plain.coeffs[mask], rtol=1e-12, atol=0)


def test_pmf_two_items():
    t = exact_pmf(new_model(0.3), 2)
    assert (t.support_min, t.support_max) == (1, 3)
    assert t.pmf() == pytest.approx([0.49, 0.21, 0.30], abs=1e-15)


def test_pmf_three_items_mean():
    t = exact_pmf(new_model(0.3), 3)
    assert moments_from_pmf(t).mean == pytest.approx(2.753, abs=1e-14)


def test_pmf_three_items_formula_agrees_beyond_stated_range():
    # The generating-function formula at n = 3 reduces to g1.
    m = new_model(0.3)
    p, q = m.p, m.q
    g1 = [q * q, q * p * (1 + q), q * p * p, p * p]
    assert exact_pmf(m, 3).pmf() == pytest.approx(g1, abs=1e-15)


@pytest.mark.parametrize("p", P_GRID)
@pytest.mark.parametrize("n", [2, 3, 4, 7, 10, 13])
def test_pmf_matches_enumeration(brute, p, n):
    m = new_model(p)
    ref = brute(float(m.p), float(m.q), n)
    t = exact_pmf(m, n)
    assert t.as_dict().keys() == ref.keys()
    assert max(abs(t.as_dict()[k] - ref[k]) for k in ref) <= 1e-12


@pytest.mark.parametrize("n", [2, 3, 4, 6, 9])
def test_pmf_rational_mode_exact(brute, n):
    m = new_model(Fraction(3, 10))
    assert exact_pmf(m, n).as_dict() == brute(m.p, m.q, n)


def test_pmf_degenerate_limit():
    m = new_model(1 - 1e-12)
    s = moments_from_pmf(exact_pmf(m, 5))
    assert s.mean == pytest.approx(9, abs=1e-9)
    assert s.variance == pytest.approx(0, abs=1e-9)


@given(st.floats(0.01, 0.99), st.integers(2, 60))
def test_pmf_table_invariants(p, n):
    t = exact_pmf(new_model(p), n)
    assert t.support_min == math.ceil(n / 2) and t.support_max == 2 * n - 1
    assert (t.probs >= 0).all()
    assert abs(math.fsum(t.probs) - 1) <= 1e-12


@pytest.mark.parametrize("n", [4, 10, 30, 50])
def test_pmf_mgf_consistency(n):
    m = new_model(0.3)
    t = exact_pmf(m, n)
    for lam in np.linspace(-1, 1, 21):
        ref = float(np.sum(t.pmf() * np.exp(lam * t.support)))
        assert mgf(m, n, lam) == pytest.approx(ref, rel=1e-10)


def test_pmf_underflow_raises_capacity_error():
    with pytest.raises(CapacityError):
        exact_pmf(new_model(0.3), 1000)


def test_log_pmf_normalised():
    t = exact_pmf_log(new_model(0.3), 50)
    assert abs(math.fsum(np.exp(t.probs)) - 1) <= 1e-10


@pytest.mark.parametrize("n", [2, 3, 4, 25, 120])
def test_log_pmf_matches_plain(n):
    m = new_model(0.35)
    assert np.allclose(np.exp(exact_pmf_log(m, n).probs), exact_pmf(m, n).probs, rtol=0, atol=1e-10)


def test_log_pmf_mode_near_lln_prediction():
    t = exact_pmf_log(new_model(0.3), 200)
    mode = t.support[np.argmax(t.probs)]
    assert abs(mode - 200 * 1.51 / 1.7) <= 2


def test_log_pmf_large_n_fast_and_finite():
    start = time.perf_counter()
    t = exact_pmf_log(new_model(0.3), 2000)
    assert time.perf_counter() - start < 60
    assert np.isfinite(t.probs).all()
    assert t.probs.min() < -600
    # T = 2n - 1 iff items 2..n are all defective
    assert t.probs[-1] == pytest.approx(1999 * math.log(0.3), rel=1e-12)


def test_log_tail():
    m = new_model(0.3)
    t = exact_pmf(m, 10)
    lt = exact_pmf_log(m, 10)
    for k in range(4, 21):
        ref = math.fsum(t.probs[max(0, k - t.support_min) :])
        assert math.exp(lt.log_tail(k)) == pytest.approx(ref, rel=1e-10)
    assert lt.log_tail(100) == -math.inf


def test_moments_two_items():
    assert moments_from_pmf(exact_pmf(new_model(0.3), 2)).mean == pytest.approx(1.81, abs=1e-15)


def test_moments_exact_mode():
    s = moments_from_pmf(exact_pmf(new_model(Fraction(3, 10)), 3))
    assert s.mean == Fraction(2753, 1000)


def test_generating_polynomial_degree_and_value():
    m = new_model(0.3)
    for n in (4, 9, 20):
        g = generating_polynomial(m, n)
        assert g.degree == 2 * n - 1 and g.offset == math.ceil(n / 2)
        assert g(1.0) == pytest.approx(1.0, abs=1e-12)
        gl = generating_polynomial(m, n, log_domain=True)
        assert gl.log_eval(0.2) == pytest.approx(math.log(g(math.exp(0.2))), rel=1e-12)


def test_table_rejects_bad_support():
    m = new_model(0.3)
    with pytest.raises(ValueError):
        PmfTable(4, m, 1, 7, np.full(7, 1 / 7))
