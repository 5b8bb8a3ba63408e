"""Exact law of ``T_n`` by propagating its generating function in coefficient space.

The generating function is ``G(x) = g1(x) kappa_{n-2}(x) + g2(x) kappa_{n-3}(x)``
where ``kappa`` follows the three-term recurrence

    kappa_{k+1} = p x^2 kappa_k + q x (q + p x) kappa_{k-1},  kappa_0 = 0, kappa_1 = 1.

Every coefficient involved is nonnegative, so the log-domain variant is an
exact restatement with log-sum-exp in place of addition. Work is ``O(n^2)``.
"""

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import logsumexp

from ._validation import CapacityError, check_count
from .model import ContaminationModel, MomentSummary
from .simulator import explicit_count

_NORM_TOL = 1e-12
_LOG_NORM_TOL = 1e-10


@dataclass(frozen=True)
class ProbPolynomial:
    """Dense polynomial; ``coeffs[k]`` multiplies ``x**k``.

    With ``log_domain`` set the entries are natural logs of the coefficients
    and ``-inf`` stands for zero.
    """

    coeffs: np.ndarray
    log_domain: bool = False

    @property
    def offset(self):
        """Lowest power with a nonzero coefficient, or ``None`` for the zero polynomial."""
        nz = np.flatnonzero(self.coeffs > -np.inf) if self.log_domain else np.flatnonzero(self.coeffs)
        return int(nz[0]) if nz.size else None

    @property
    def degree(self):
        nz = np.flatnonzero(self.coeffs > -np.inf) if self.log_domain else np.flatnonzero(self.coeffs)
        return int(nz[-1]) if nz.size else None

    def __call__(self, x):
        """Evaluate at ``x`` (plain domain only)."""
        if self.log_domain:
            raise ValueError("evaluate a log-domain polynomial with log_eval")
        return np.polynomial.polynomial.polyval(x, self.coeffs.astype(float))

    def log_eval(self, log_x):
        """``log G(exp(log_x))`` without leaving log space."""
        c = self.coeffs if self.log_domain else np.log(self.coeffs.astype(float))
        return float(logsumexp(c + log_x * np.arange(len(c))))


def _kappa_pair(p, q, n):
    """``(kappa_{n-1}, kappa_n)`` as dense arrays; object dtype for exact ``p``."""
    dtype = object if isinstance(p, Fraction) else float
    zero = Fraction(0) if dtype is object else 0.0
    prev = np.array([zero], dtype=dtype)
    cur = np.array([zero + 1], dtype=dtype)
    if n == 0:
        return np.array([zero], dtype=dtype), prev
    qq, pq = q * q, p * q
    for k in range(1, n):
        nxt = np.full(2 * k + 1, zero, dtype=dtype)
        nxt[2 : 2 + len(cur)] += p * cur
        nxt[1 : 1 + len(prev)] += qq * prev
        nxt[2 : 2 + len(prev)] += pq * prev
        prev, cur = cur, nxt
    return prev, cur


def _log_kappa_pair(log_p, log_q, n):
    prev = np.array([-np.inf])
    cur = np.array([0.0])
    if n == 0:
        return np.array([-np.inf]), prev
    log_qq, log_pq = 2 * log_q, log_p + log_q
    for k in range(1, n):
        nxt = np.full(2 * k + 1, -np.inf)
        nxt[2 : 2 + len(cur)] = log_p + cur
        nxt[1 : 1 + len(prev)] = np.logaddexp(nxt[1 : 1 + len(prev)], log_qq + prev)
        nxt[2 : 2 + len(prev)] = np.logaddexp(nxt[2 : 2 + len(prev)], log_pq + prev)
        prev, cur = cur, nxt
    return prev, cur


def kappa_poly(m, n, log_domain=False):
    """``kappa_n`` as a polynomial in ``x``; degree ``2(n-1)`` for ``n >= 1``."""
    n = check_count(n)
    if log_domain:
        p = float(m.p)
        coeffs = _log_kappa_pair(math.log(p), math.log1p(-p), n)[1]
    else:
        coeffs = _kappa_pair(m.p, m.q, n)[1]
    return ProbPolynomial(coeffs, log_domain)


def _g_coeffs(p, q):
    """Coefficients of ``g1`` and ``g2`` at powers 2..5."""
    pp = p * p
    g1 = [q * q, q * p * (1 + q), q * pp, pp]
    g2 = [q**4, 2 * q**3 * p, q * q * p * (2 - q), q * pp]
    return g1, g2


@dataclass(frozen=True)
class PmfTable:
    """``probs[i] = P(T_n = support_min + i)``.

    In log-domain tables ``probs`` holds natural-log probabilities. Tables
    built from a :class:`fractions.Fraction` probability hold exact
    fractions (object dtype).
    """

    n: int
    model: ContaminationModel
    support_min: int
    support_max: int
    probs: np.ndarray
    log_domain: bool = False

    def __post_init__(self):
        if len(self.probs) != self.support_max - self.support_min + 1:
            raise ValueError("probs length does not match the support")
        if self.support_min < (self.n + 1) // 2 or self.support_max > 2 * self.n - 1:
            raise ValueError(
                f"support [{self.support_min}, {self.support_max}] outside "
                f"[{(self.n + 1) // 2}, {2 * self.n - 1}]"
            )
        if self.log_domain:
            total = float(logsumexp(self.probs))
            if abs(total) > _LOG_NORM_TOL:
                raise CapacityError(f"log-probabilities sum to exp({total!r})")
        elif self.model.is_exact:
            if sum(self.probs) != 1 or any(v < 0 for v in self.probs):
                raise ValueError("exact pmf is not a probability vector")
        else:
            if (self.probs < 0).any() or abs(math.fsum(self.probs) - 1.0) > _NORM_TOL:
                raise CapacityError("pmf does not sum to one within 1e-12")

    @property
    def support(self):
        return np.arange(self.support_min, self.support_max + 1)

    def pmf(self):
        """Probabilities as a float array (exponentiated for log tables)."""
        return np.exp(self.probs) if self.log_domain else self.probs.astype(float)

    def log_pmf(self):
        if self.log_domain:
            return self.probs
        with np.errstate(divide="ignore"):
            return np.log(self.probs.astype(float))

    def log_tail(self, k):
        """``log P(T_n >= k)``."""
        i = max(0, math.ceil(k) - self.support_min)
        if i >= len(self.probs):
            return -math.inf
        return float(logsumexp(self.log_pmf()[i:]))

    def as_dict(self):
        return dict(zip(self.support.tolist(), self.probs.tolist()))


def _enumerated_table(m, n, count):
    """Brute-force table over all ``2**n`` patterns (used only for tiny ``n``)."""
    exact = m.is_exact
    weights = {}
    for bits in itertools.product((0, 1), repeat=n):
        d = sum(bits)
        w = m.p**d * m.q ** (n - d)
        t = count(bits)
        weights[t] = weights.get(t, 0) + w
    lo, hi = min(weights), max(weights)
    probs = np.array(
        [weights.get(k, 0) for k in range(lo, hi + 1)], dtype=object if exact else float
    )
    return PmfTable(n, m, lo, hi, probs)


def _trim(n, m, coeffs, log_domain):
    lo, hi = (n + 1) // 2, 2 * n - 1
    body = coeffs[lo : hi + 1]
    outside = np.concatenate([coeffs[:lo], coeffs[hi + 1 :]])
    if log_domain:
        inside_ok = np.isfinite(body).all()
        outside_ok = (outside == -np.inf).all()
    elif m.is_exact:
        inside_ok = all(v > 0 for v in body)
        outside_ok = all(v == 0 for v in outside)
    else:
        inside_ok = np.isfinite(body).all() and (body > 0).all()
        outside_ok = (outside == 0).all()
    if not outside_ok:
        raise AssertionError("generating function has mass outside the support")
    if not inside_ok:
        raise CapacityError(
            f"probabilities of T_{n} leave the double range at p={float(m.p)!r}; "
            "use exact_pmf_log"
        )
    return PmfTable(n, m, lo, hi, body, log_domain)


def exact_pmf(m, n):
    """Exact distribution of ``T_n`` (``n >= 2``).

    ``n = 2`` and ``n = 3`` are tabulated from their 4 and 8 patterns; larger
    ``n`` uses the generating function. Raises :class:`CapacityError` when
    tail probabilities underflow, in which case :func:`exact_pmf_log` applies.
    """
    n = check_count(n, minimum=2)
    if n == 2:
        q, p = m.q, m.p
        probs = np.array([q * q, p * q, p], dtype=object if m.is_exact else float)
        return PmfTable(2, m, 1, 3, probs)
    if n == 3:
        return _enumerated_table(m, 3, explicit_count)

    p, q = m.p, m.q
    k3, k2 = _kappa_pair(p, q, n - 2)
    g1, g2 = _g_coeffs(p, q)
    exact = m.is_exact
    coeffs = np.full(2 * n, Fraction(0) if exact else 0.0, dtype=object if exact else float)
    for i in range(4):
        coeffs[2 + i : 2 + i + len(k2)] += g1[i] * k2
        coeffs[2 + i : 2 + i + len(k3)] += g2[i] * k3
    return _trim(n, m, coeffs, log_domain=False)


def exact_pmf_log(m, n):
    """Log-probability table of ``T_n``; stays finite for large ``n``."""
    n = check_count(n, minimum=2)
    p = float(m.p)
    log_p, log_q = math.log(p), math.log1p(-p)
    if n <= 3:
        small = exact_pmf(m.as_float(), n)
        return PmfTable(n, m, small.support_min, small.support_max, np.log(small.probs), True)

    k3, k2 = _log_kappa_pair(log_p, log_q, n - 2)
    g1, g2 = (np.log(g) for g in _g_coeffs(p, 1.0 - p))
    coeffs = np.full(2 * n, -np.inf)
    for i in range(4):
        sl = slice(2 + i, 2 + i + len(k2))
        coeffs[sl] = np.logaddexp(coeffs[sl], g1[i] + k2)
        sl = slice(2 + i, 2 + i + len(k3))
        coeffs[sl] = np.logaddexp(coeffs[sl], g2[i] + k3)
    return _trim(n, m, coeffs, log_domain=True)


def generating_polynomial(m, n, log_domain=False):
    """``G(x)`` as a :class:`ProbPolynomial` with coefficients from power 0."""
    table = exact_pmf_log(m, n) if log_domain else exact_pmf(m, n)
    fill = -np.inf if log_domain else 0
    coeffs = np.concatenate([np.full(table.support_min, fill, dtype=table.probs.dtype), table.probs])
    return ProbPolynomial(coeffs, log_domain)


def moments_from_pmf(t):
    """Mean and variance of a :class:`PmfTable`; exact for exact tables."""
    k = t.support
    if t.model.is_exact and not t.log_domain:
        mean = sum(int(a) * b for a, b in zip(k, t.probs))
        var = sum((int(a) - mean) ** 2 * b for a, b in zip(k, t.probs))
        return MomentSummary(t.n, mean, var, source="pmf")
    w = t.pmf()
    mean = float(np.dot(k, w))
    var = float(np.dot((k - mean) ** 2, w))
    return MomentSummary(t.n, mean, var, source="pmf")
