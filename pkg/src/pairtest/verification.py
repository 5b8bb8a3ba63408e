"""Cross-validation matrix behind ``pairtest verify``.

Every check pits two independent routes against each other on the same
inputs and records the worst discrepancy seen.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import analytic, asymptotics, exactdist
from .model import new_model
from .simulator import SemigroupElement, explicit_count, recurrence_count, recurrence_counts, run_pta

ENUMERATION_LIMIT = 20
LAMBDA_GRID = np.linspace(-1.0, 1.0, 21)
BLOCK_LAMBDA_GRID = np.linspace(-0.5, 0.5, 11)


@dataclass(frozen=True)
class CheckResult:
    name: str
    n: object
    p: object
    max_error: float
    tolerance: float

    @property
    def passed(self):
        return bool(self.max_error <= self.tolerance)


def all_patterns(n):
    """All ``2**n`` patterns as rows; row ``i`` is the binary expansion of ``i``."""
    return np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.uint8).reshape(-1, n)


def enumerate_pmf(m, n):
    """Weighted histogram of recurrence counts over all patterns.

    Returns ``(support_min, probs)``; probabilities are exact fractions when
    ``m.p`` is a :class:`fractions.Fraction`.
    """
    X = all_patterns(n)
    counts = recurrence_counts(X)
    defects = X.sum(axis=1)
    lo, hi = int(counts.min()), int(counts.max())
    if m.is_exact:
        probs = [0] * (hi - lo + 1)
        for t, d in zip(counts.tolist(), defects.tolist()):
            probs[t - lo] += m.p**d * m.q ** (n - d)
        return lo, probs
    p, q = float(m.p), float(m.q)
    w = p**defects * q ** (n - defects)
    probs = np.bincount(counts - lo, weights=w, minlength=hi - lo + 1)
    return lo, probs


def check_semigroup():
    worst = 0
    for a, b in itertools.product(SemigroupElement, repeat=2):
        worst += int(not np.array_equal((a * b).matrix, a.matrix @ b.matrix))
    return CheckResult("semigroup_table", "", "", worst, 0)


def check_pathwise(n):
    mismatches = 0
    for row in all_patterns(n).tolist():
        trace = run_pta(row)
        r = recurrence_count(row)
        e = explicit_count(row)
        if not (trace.total == r == e and list(trace.deduced) == row):
            mismatches += 1
    return CheckResult("pathwise_triple_agreement", n, "", mismatches, 0)


def check_support(n):
    counts = recurrence_counts(all_patterns(n))
    err = abs(int(counts.min()) - (n + 1) // 2) + abs(int(counts.max()) - (2 * n - 1))
    return CheckResult("support_bounds", n, "", err, 0)


def check_pmf_enumeration(m, n):
    table = exactdist.exact_pmf(m, n)
    lo, probs = enumerate_pmf(m, n)
    if lo != table.support_min or len(probs) != len(table.probs):
        return CheckResult("pmf_vs_enumeration", n, m.p, math.inf, 1e-12)
    err = float(np.max(np.abs(np.asarray(probs) - table.probs)))
    return CheckResult("pmf_vs_enumeration", n, m.p, err, 1e-12)


def check_log_pmf(m, n):
    err = float(np.max(np.abs(np.exp(exactdist.exact_pmf_log(m, n).probs) - exactdist.exact_pmf(m, n).probs)))
    return CheckResult("log_pmf_vs_pmf", n, m.p, err, 1e-10)


def check_mgf_pmf(m, n):
    table = exactdist.exact_pmf(m, n)
    k, w = table.support, table.pmf()
    err = 0.0
    for lam in LAMBDA_GRID:
        ref = float(np.sum(w * np.exp(lam * k)))
        err = max(err, abs(analytic.mgf(m, n, lam) - ref) / ref)
    return CheckResult("mgf_vs_pmf", n, m.p, err, 1e-10)


def check_mgf_block(m, n):
    err = 0.0
    for lam in BLOCK_LAMBDA_GRID:
        a = analytic.mgf(m, n, lam)
        err = max(err, abs(analytic.mgf_blockmatrix(m, n, lam) - a) / a)
    return CheckResult("mgf_vs_blockmatrix", n, m.p, err, 1e-10)


def check_moments(m, n):
    cf = analytic.closed_form_moments(m, n)
    pm = exactdist.moments_from_pmf(exactdist.exact_pmf(m, n))
    err = max(abs(cf.mean - pm.mean) / pm.mean, abs(cf.variance - pm.variance) / pm.variance)
    return CheckResult("closed_form_moments_vs_pmf", n, m.p, err, 1e-9)


def check_derivatives(m):
    c = asymptotics.constants(m)
    d1, d2 = asymptotics.derivative_check(m)
    return [
        CheckResult("lambda_prime_at_0_vs_mu", "", m.p, abs(d1 - c.mu), 1e-5),
        CheckResult("lambda_second_at_0_vs_sigma2", "", m.p, abs(d2 - c.sigma2), 1e-3),
    ]


def check_rate_at_mean(m):
    c = asymptotics.constants(m)
    r = asymptotics.rate(m, c.mu)
    return CheckResult("rate_vanishes_at_mu", "", m.p, abs(r.rate) + abs(r.lambda_star), 1e-9)


def check_roots(m):
    worst = 0.0
    for lam in np.linspace(-20, 20, 81):
        a = analytic.alpha(m, lam)
        b = m.p * math.exp(2 * lam)
        resid = a.alpha0**2 - b * a.alpha0 - m.q * math.exp(lam) * (m.q + m.p * math.exp(lam))
        scale = max(a.alpha0**2, b * a.alpha0)
        worst = max(worst, abs(resid) / math.ulp(scale))
        if not a.alpha0 > abs(a.alpha1):
            worst = math.inf
    return CheckResult("characteristic_roots_ulps", "", m.p, worst, 8)


def _guarded(name, n, p, check, *args):
    # A check that raises counts as failed rather than aborting the whole run.
    try:
        return check(*args)
    except Exception:  # noqa: BLE001
        return CheckResult(name, n, p, math.inf, 0.0)


def run_verification(n_max=12, ps=(0.3, 0.35)):
    """Run the full matrix; returns a list of :class:`CheckResult`."""
    if n_max > ENUMERATION_LIMIT:
        raise ValueError(f"n_max must be <= {ENUMERATION_LIMIT} for enumeration-backed checks")
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    results = [check_semigroup()]
    for n in range(2, n_max + 1):
        results.append(check_pathwise(n))
        results.append(check_support(n))
    for p in ps:
        m = new_model(p)
        for n in range(2, n_max + 1):
            results.append(_guarded("pmf_vs_enumeration", n, p, check_pmf_enumeration, m, n))
            results.append(_guarded("log_pmf_vs_pmf", n, p, check_log_pmf, m, n))
            results.append(_guarded("mgf_vs_pmf", n, p, check_mgf_pmf, m, n))
            results.append(_guarded("mgf_vs_blockmatrix", n, p, check_mgf_block, m, n))
            if n >= 3:
                results.append(_guarded("closed_form_moments_vs_pmf", n, p, check_moments, m, n))
        results.extend(check_derivatives(m))
        results.append(check_rate_at_mean(m))
        results.append(check_roots(m))
    return results
