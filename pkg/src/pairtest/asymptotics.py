"""Law of large numbers, CLT and large-deviation rate for ``T_n / n``.

The limiting scaled cumulant generating function is ``Lam(lam) = log alpha_0(lam)``.
It is strictly convex with ``Lam'`` increasing from 1/2 (as ``lam -> -inf``) to
2 (as ``lam -> +inf``). The rate function is its Legendre transform, so
``I(x)`` is finite exactly on ``[1/2, 2]``.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._validation import check_count, check_finite
from .analytic import log_alpha_parts
from .exactdist import exact_pmf_log

RATE_TOL = 1e-10
BOUNDARY_OFFSET = 1e-6
FD_STEP = 1e-5
X_MIN, X_MAX = 0.5, 2.0
_MAX_ITER = 200


@dataclass(frozen=True)
class AsymptoticConstants:
    mu: float
    sigma2: float


@dataclass(frozen=True)
class RatePoint:
    x: float
    rate: float
    lambda_star: float
    converged: bool
    boundary: bool = False


def constants(m):
    """Centering ``mu = (2 - q^2) / (1 + q)`` and CLT variance ``sigma2``."""
    q = float(m.q)
    mu = (2 - q * q) / (1 + q)
    sigma2 = q * (1 - q) * (q**3 + 3 * q * q + 5 * q + 4) / (q + 1) ** 3
    return AsymptoticConstants(mu, sigma2)


def log_alpha0(m, lam):
    """``Lam(lam) = log alpha_0(lam)``, stable for any finite ``lam``."""
    return log_alpha_parts(m, lam)[0]


def log_alpha0_prime(m, lam):
    """``Lam'(lam) = alpha_0' / alpha_0``, evaluated in log space.

    From ``alpha_0^2 = b alpha_0 + c`` one gets
    ``alpha_0' = (2 b alpha_0 + c') / sqrt(D)``; all terms are positive.
    """
    lam = check_finite(lam)
    p, q = float(m.p), float(m.q)
    log_a0, _, half_log_d = log_alpha_parts(m, lam)
    log_b = math.log(p) + 2 * lam
    log_dc = math.log(q) + lam + np.logaddexp(math.log(q), math.log(2 * p) + lam)
    log_num = np.logaddexp(math.log(2.0) + log_b + log_a0, log_dc)
    return float(math.exp(log_num - log_a0 - half_log_d))


def _log_alpha0_second(m, lam):
    # Plain-float second derivative; only used to steer Newton steps.
    p, q = float(m.p), float(m.q)
    e = math.exp(lam)
    b = p * e * e
    c1 = q * e * (q + 2 * p * e)
    c2 = q * e * (q + 4 * p * e)
    s = math.sqrt(b * b + 4 * q * e * (q + p * e))
    a = 0.5 * (b + s)
    ds = 2 * (b * b + c1) / s
    da = b + (b * b + c1) / s
    dda = 2 * b + ((4 * b * b + c2) * s - (b * b + c1) * ds) / (s * s)
    return dda / a - (da / a) ** 2


def _solve_slope(m, x):
    """Find ``lam`` with ``Lam'(lam) = x``: bracket, then Newton guarded by bisection."""
    f = lambda lam: log_alpha0_prime(m, lam) - x  # noqa: E731
    lam = 0.0
    r = f(lam)
    if abs(r) <= RATE_TOL:
        return lam, r, True
    lo, hi = (-1.0, 0.0) if r > 0 else (0.0, 1.0)
    for _ in range(_MAX_ITER):
        if f(lo) <= 0 <= f(hi):
            break
        if f(lo) > 0:
            lo *= 2
        else:
            hi *= 2
    else:
        return lam, r, False

    best, best_r = lam, r
    lam = 0.5 * (lo + hi)
    for _ in range(_MAX_ITER):
        r = f(lam)
        if abs(r) < abs(best_r):
            best, best_r = lam, r
        if abs(r) <= RATE_TOL:
            return lam, r, True
        if r > 0:
            hi = lam
        else:
            lo = lam
        try:
            step = r / _log_alpha0_second(m, lam)
            cand = lam - step
        except (OverflowError, ZeroDivisionError):
            cand = math.nan
        if not (lo < cand < hi):
            cand = 0.5 * (lo + hi)
        if hi - lo <= 4 * math.ulp(max(abs(lo), abs(hi), 1.0)):
            break
        lam = cand
    return best, best_r, abs(best_r) <= RATE_TOL


def rate(m, x):
    """Rate function ``I(x) = sup_lam (x lam - Lam(lam))`` at a single ``x``.

    Outside ``[1/2, 2]`` the rate is ``+inf``. At the endpoints the
    supremum is not attained; the value at ``x -/+ 1e-6`` is returned with
    ``boundary=True``.
    """
    x = check_finite(x, name="x")
    if x < X_MIN or x > X_MAX:
        lam = -math.inf if x < X_MIN else math.inf
        return RatePoint(x, math.inf, lam, True)
    boundary = x in (X_MIN, X_MAX)
    target = x + BOUNDARY_OFFSET if x == X_MIN else x - BOUNDARY_OFFSET if x == X_MAX else x
    lam, _, ok = _solve_slope(m, target)
    value = max(0.0, target * lam - log_alpha0(m, lam))
    return RatePoint(x, value, lam, ok, boundary)


def tail_exponent(m, n, x, table=None):
    """``-(1/n) log P(T_n >= x n)`` from the exact log-domain distribution."""
    n = check_count(n, minimum=2)
    if table is None:
        table = exact_pmf_log(m, n)
    return -table.log_tail(x * n) / n


class DegenerateVarianceWarning(RuntimeWarning):
    pass


def clt_standardize(samples, c, n):
    """``sqrt(n) (T/n - mu) / sigma`` for every draw in a Monte Carlo summary.

    When ``sigma2 < 1e-12`` the values are only centred and scaled by
    ``sqrt(n)``, and a :class:`DegenerateVarianceWarning` is issued.
    """
    n = check_count(n, minimum=1)
    if samples.n != n:
        raise ValueError(f"samples were drawn at n={samples.n}, not n={n}")
    centred = samples.standardized(c.mu)
    if c.sigma2 < 1e-12:
        warnings.warn(
            f"CLT variance {c.sigma2!r} is degenerate; values are not scaled",
            DegenerateVarianceWarning,
            stacklevel=2,
        )
        return centred
    return centred / math.sqrt(c.sigma2)


def lln_deviation(m, n):
    """``E T_n / n - mu`` exactly: ``(q^2 + q - 1)(1 - (-q)^n) / ((1 + q)^2 n)``."""
    n = check_count(n, minimum=1)
    q = float(m.q)
    return (q * q + q - 1) * (1 - (-q) ** n) / ((1 + q) ** 2 * n)


def derivative_check(m, h=FD_STEP):
    """Central differences of ``Lam`` at 0: ``(Lam'(0), Lam''(0))``."""
    f = lambda lam: log_alpha0(m, lam)  # noqa: E731
    d1 = (f(h) - f(-h)) / (2 * h)
    d2 = (f(h) - 2 * f(0.0) + f(-h)) / (h * h)
    return d1, d2
