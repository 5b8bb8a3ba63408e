"""Closed-form moment generating function of ``T_n`` and its moments.

The MGF is built from the two roots ``alpha_0 > |alpha_1|`` of

    t^2 - b t - c = 0,   b = p e^{2 lam},   c = q e^{lam} (q + p e^{lam}),

through ``kappa_n = (alpha_0^n - alpha_1^n) / (alpha_0 - alpha_1)``. Log
variants stay finite where the plain forms overflow.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from ._validation import CapacityError, check_count, check_finite
from .model import MomentSummary

__all__ = [
    "AlphaPair",
    "MomentSummary",
    "alpha",
    "log_alpha_parts",
    "kappa_scalar",
    "log_kappa_scalar",
    "mgf",
    "log_mgf",
    "mgf_blockmatrix",
    "closed_form_moments",
]


@dataclass(frozen=True)
class AlphaPair:
    alpha0: float
    alpha1: float
    lam: float


def _log_b(p, lam):
    return math.log(p) + 2 * lam


def _log_c(p, q, lam):
    return math.log(q) + lam + np.logaddexp(math.log(q), math.log(p) + lam)


def log_alpha_parts(m, lam):
    """``(log alpha_0, log|alpha_1|, log sqrt(discriminant))`` without overflow.

    The discriminant ``b^2 + 4c`` has only positive terms, so it is summed in
    log space; ``alpha_1 = -c / alpha_0`` avoids the cancellation in
    ``b - sqrt(D)``.
    """
    lam = check_finite(lam)
    p, q = float(m.p), float(m.q)
    lb, lc = _log_b(p, lam), _log_c(p, q, lam)
    half_log_d = 0.5 * np.logaddexp(2 * lb, math.log(4.0) + lc)
    log_a0 = float(np.logaddexp(lb, half_log_d) - math.log(2.0))
    return log_a0, float(lc - log_a0), float(half_log_d)


def alpha(m, lam):
    """Both characteristic roots at ``lam``; ``alpha_1`` is the negative one."""
    lam = check_finite(lam)
    p, q = float(m.p), float(m.q)
    el = math.exp(lam)
    b = p * el * el
    c = q * el * q + q * el * p * el
    disc = b * b + 4 * c
    if lam == 0.0:
        assert abs(disc - (1 + q) ** 2) <= 4 * math.ulp((1 + q) ** 2)
    if not math.isfinite(disc):
        raise CapacityError(f"alpha overflows at lambda={lam!r}; use log_alpha_parts")
    a0 = 0.5 * (b + math.sqrt(disc))
    a1 = -c / a0
    if not a0 > abs(a1):
        raise AssertionError(f"dominant-root property fails at lambda={lam!r}")
    return AlphaPair(a0, a1, lam)


def kappa_scalar(m, n, lam):
    n = check_count(n)
    a = alpha(m, lam)
    try:
        value = (a.alpha0**n - a.alpha1**n) / (a.alpha0 - a.alpha1)
    except OverflowError:
        value = math.inf
    if not math.isfinite(value):
        raise CapacityError(f"kappa_{n} overflows at lambda={lam!r}; use log_kappa_scalar")
    return value


def log_kappa_scalar(m, n, lam):
    """``log kappa_n(lam)``; ``-inf`` for ``n = 0``.

    Written as ``(n-1) log alpha_0 + log(1 - r^n) - log(1 - r)`` with
    ``r = alpha_1 / alpha_0 in (-1, 0)``. Since ``1 - |r| = b / alpha_0``,
    ``log|r|`` comes from ``log1p`` and stays accurate when ``|r|`` is close to 1.
    """
    n = check_count(n)
    if n == 0:
        return -math.inf
    lam = check_finite(lam)
    log_a0, _, _ = log_alpha_parts(m, lam)
    log_abs_r = math.log1p(-math.exp(_log_b(float(m.p), lam) - log_a0))
    rn = n * log_abs_r
    log_num = math.log(-math.expm1(rn)) if n % 2 == 0 else math.log1p(math.exp(rn))
    return (n - 1) * log_a0 + log_num - math.log1p(math.exp(log_abs_r))


def _bracket_logs(m, lam):
    """Logs of the two polynomial brackets multiplying ``kappa_{n-2}`` and ``kappa_{n-3}``."""
    p, q = float(m.p), float(m.q)
    lp, lq = math.log(p), math.log(q)
    powers = np.array([3 * lam, 2 * lam, lam, 0.0])
    h1 = np.array([2 * lp, lq + 2 * lp, lq + lp + math.log1p(q), 2 * lq])
    h2 = np.array([2 * lp, lq + lp + math.log(2 - q), math.log(2.0) + 2 * lq + lp, 3 * lq])
    return float(logsumexp(h1 + powers)), float(lq + logsumexp(h2 + powers))


def _two_point_log_mgf(m, lam):
    # T_2 takes 1, 2, 3 with probabilities q^2, pq, p.
    p, q = float(m.p), float(m.q)
    return float(logsumexp([2 * math.log(q) + lam, math.log(p * q) + 2 * lam, math.log(p) + 3 * lam]))


def log_mgf(m, n, lam):
    """``log E exp(lam T_n)``, finite for any finite ``lam`` and ``n >= 2``."""
    n = check_count(n, minimum=2)
    lam = check_finite(lam)
    if n == 2:
        return _two_point_log_mgf(m, lam)
    l1, l2 = _bracket_logs(m, lam)
    return 2 * lam + float(
        np.logaddexp(l1 + log_kappa_scalar(m, n - 2, lam), l2 + log_kappa_scalar(m, n - 3, lam))
    )


def mgf(m, n, lam):
    """``E exp(lam T_n)`` from the closed form; ``n = 2`` uses its three-point law."""
    n = check_count(n, minimum=2)
    lam = check_finite(lam)
    p, q = float(m.p), float(m.q)
    if n == 2:
        return math.exp(_two_point_log_mgf(m, lam))
    try:
        e = math.exp(lam)
        h1 = p * p * e**3 + q * p * p * e**2 + q * (1 - q * q) * e + q * q
        h2 = q * (p * p * e**3 + q * p * (2 - q) * e**2 + 2 * q * q * p * e + q**3)
        value = e * e * (h1 * kappa_scalar(m, n - 2, lam) + h2 * kappa_scalar(m, n - 3, lam))
    except OverflowError:
        value = math.inf
    if not math.isfinite(value):
        raise CapacityError(f"MGF of T_{n} overflows at lambda={lam!r}; use log_mgf")
    return value


def mgf_blockmatrix(m, n, lam):
    """``E exp(lam T_n)`` by iterating the 4x4 conditional-expectation operator.

    State ``m_k`` stacks ``E[e^{lam T_k} | X_k = 1]``, ``E[e^{lam T_k} | X_k = 0]``
    and the same two quantities for ``e^{lam T_{k-1}}``; ``m_1 = (e^lam, e^lam, 1, 1)``.
    Shares nothing with :func:`mgf` beyond the model, so the two cross-check
    each other. Overflows for large ``n * lam``.
    """
    n = check_count(n, minimum=2)
    lam = check_finite(lam)
    p, q = float(m.p), float(m.q)
    e1, e2 = math.exp(lam), math.exp(2 * lam)
    op = np.array(
        [
            [e2 * p, e2 * q, 0.0, 0.0],
            [0.0, 0.0, e2 * p, e1 * q],
            [p, q, 0.0, 0.0],
            [p, q, 0.0, 0.0],
        ]
    )
    state = np.array([e1, e1, 1.0, 1.0])
    for _ in range(n - 1):
        state = op @ state
    value = p * state[0] + q * state[1]
    if not math.isfinite(value):
        raise CapacityError(f"block-matrix MGF overflows at n={n}, lambda={lam!r}")
    return float(value)


def closed_form_mean(m, n):
    n = check_count(n, minimum=1)
    q = m.q
    return n * (2 - q * q) / (1 + q) + (q * q + q - 1) / (1 + q) ** 2 * (1 - (-q) ** n)


def closed_form_variance(m, n):
    """Closed-form variance; the formula is asserted for ``n >= 3`` only."""
    n = check_count(n, minimum=1)
    q = m.q
    s = (-q) ** n
    w = q * q + q - 1
    linear = n * (1 - q) / (q + 1) ** 3 * (q * (q**3 + 3 * q * q + 5 * q + 4) + s * (2 * q + 4) * w)
    const = (1 - s) / (q + 1) ** 4 * (q * (5 * q * q + 3 * q - 7) + s * w * w)
    return linear + const


def closed_form_moments(m, n):
    """Mean and variance of ``T_n`` from the closed forms.

    For ``n < 3`` the variance comes from enumerating the patterns instead
    and the result is marked ``source="enumeration"``. Exact arithmetic is
    kept when ``m.p`` is a :class:`fractions.Fraction`.
    """
    n = check_count(n, minimum=1)
    mean = closed_form_mean(m, n)
    if n >= 3:
        return MomentSummary(n, mean, closed_form_variance(m, n), source="closed_form")
    from .exactdist import exact_pmf, moments_from_pmf

    if n == 1:
        return MomentSummary(1, mean, 0 * mean, source="enumeration")
    enum = moments_from_pmf(exact_pmf(m, n))
    return MomentSummary(n, mean, enum.variance, source="enumeration")
