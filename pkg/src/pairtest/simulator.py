"""Pairwise testing: state machine, test-count recurrence, closed formula, Monte Carlo.

Items are indexed ``1..n``. The algorithm always works on the two
highest-indexed unclassified items, so the state machine, the recurrence and
the closed formula agree pattern by pattern, not just in distribution.
"""

import enum
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from ._validation import check_count, check_patterns, check_probability
from .model import ContaminationModel

# Reps per independently seeded sub-stream; fixing it makes Monte Carlo output
# independent of the number of workers.
STREAM_BLOCK = 4096
_COLUMN_CHUNK = 512


@dataclass(frozen=True)
class DefectPattern:
    """Item statuses ``(X_1, ..., X_n)``, 1 meaning defective."""

    statuses: tuple

    def __post_init__(self):
        arr = check_patterns(self.statuses)
        object.__setattr__(self, "statuses", tuple(int(v) for v in arr[0]))

    @property
    def n(self):
        return len(self.statuses)

    def __getitem__(self, i):
        # 1-based to match the item numbering; X_0 and below read as 0.
        return self.statuses[i - 1] if i >= 1 else 0


@dataclass(frozen=True)
class TestEvent:
    items: tuple
    outcome: bool

    __test__ = False  # not a pytest class


@dataclass
class PtaTrace:
    tests: list = field(default_factory=list)
    deduced: tuple = ()

    @property
    def total(self):
        return len(self.tests)


def _as_pattern(pattern):
    return pattern if isinstance(pattern, DefectPattern) else DefectPattern(tuple(pattern))


def run_pta(pattern):
    """Run the pairwise testing algorithm on a known pattern with a perfect test kit.

    While at least two items of the binomial set remain, the pair
    ``(k, k-1)`` is tested. A contaminated pair is resolved by testing item
    ``k``: if it is good, ``k-1`` is deduced defective; if it is defective,
    ``k-1`` goes back into the binomial set. A single leftover item is tested
    on its own.
    """
    pattern = _as_pattern(pattern)
    if pattern.n == 0:
        raise ValueError("cannot run the algorithm on an empty pattern")
    x = pattern.statuses
    status = [None] * pattern.n
    trace = PtaTrace()

    def test(*items):
        outcome = any(x[i - 1] for i in items)
        trace.tests.append(TestEvent(items, outcome))
        return outcome

    k = pattern.n
    while k > 0:
        if k == 1:
            status[0] = int(test(1))
            k = 0
        elif not test(k, k - 1):
            status[k - 1] = status[k - 2] = 0
            k -= 2
        elif test(k):
            status[k - 1] = 1
            k -= 1
        else:
            status[k - 1], status[k - 2] = 0, 1
            k -= 2
    trace.deduced = tuple(status)
    return trace


def recurrence_count(pattern):
    """``T_n`` from ``T_k = (1-X_k)(1+X_{k-1}) + 2X_k + X_k T_{k-1} + (1-X_k) T_{k-2}``.

    Base cases are ``T_0 = 0`` and ``T_1 = 1``; an empty pattern counts 0.
    """
    x = pattern.statuses if isinstance(pattern, DefectPattern) else tuple(pattern)
    n = len(x)
    if n == 0:
        return 0
    t2, t1 = 0, 1
    for k in range(2, n + 1):
        xk, xk1 = x[k - 1], x[k - 2]
        t2, t1 = t1, (1 - xk) * (1 + xk1) + 2 * xk + xk * t1 + (1 - xk) * t2
    return t1


def recurrence_counts(X):
    """Vectorised :func:`recurrence_count` over the rows of a 0/1 matrix."""
    X = check_patterns(X)
    reps, n = X.shape
    t2 = np.zeros(reps, dtype=np.int64)
    t1 = np.ones(reps, dtype=np.int64)
    for k in range(1, n):
        xk, xk1 = X[:, k].astype(bool), X[:, k - 1]
        t2, t1 = t1, np.where(xk, 2 + t1, 1 + xk1 + t2)
    return t1


class SemigroupElement(enum.Enum):
    """The four 0/1 matrices closed under multiplication that encode ``T_n``."""

    M0 = ((1, 0), (1, 0))
    M1 = ((0, 1), (1, 0))
    M2 = ((1, 0), (0, 1))
    M3 = ((0, 1), (0, 1))

    @property
    def matrix(self):
        return np.array(self.value, dtype=np.int64)

    def __mul__(self, other):
        if not isinstance(other, SemigroupElement):
            return NotImplemented
        if self is SemigroupElement.M2:
            return other
        if other is SemigroupElement.M2:
            return self
        return _PRODUCTS[self, other]

    @classmethod
    def for_status(cls, x):
        """``B_k = X_k M0 + (1 - X_k) M1``."""
        return cls.M0 if x else cls.M1


_M0, _M1, _M2, _M3 = SemigroupElement
_PRODUCTS = {
    (_M0, _M0): _M0,
    (_M0, _M1): _M3,
    (_M0, _M3): _M3,
    (_M1, _M0): _M0,
    (_M1, _M1): _M2,
    (_M1, _M3): _M3,
    (_M3, _M0): _M0,
    (_M3, _M1): _M0,
    (_M3, _M3): _M3,
}
# Products B_n ... B_{j+1} in this set make a clean item j contribute.
_ACCEPTING = frozenset({_M1, _M0 * _M1})


def explicit_count(pattern):
    """``T_n`` from the closed formula in terms of semigroup products.

    Only valid for ``n >= 2``. The coefficient of each indicator is the status
    of item ``j`` itself; see ``tests/test_simulator.py`` for the check that
    this (and not item ``j - 1``) reproduces the recurrence.
    """
    p = _as_pattern(pattern)
    n = p.n
    if n < 2:
        raise ValueError(f"the closed formula needs n >= 2, got {n}")
    X = p.__getitem__
    t2 = 3 * X(2) + (1 - X(2)) * (1 + X(1))
    if n == 2:
        return t2
    if n == 3:
        return 2 + (1 - X(3)) * X(2) + X(3) * t2

    total = 1 + X(n) * ((1 - X(n - 1)) * X(n - 2) + 2) + X(n - 1)
    prod = SemigroupElement.M2
    for j in range(n - 1, 1, -1):
        prod = prod * SemigroupElement.for_status(X(j + 1))
        hit = int(prod in _ACCEPTING)
        if j >= 3:
            weight = (1 - X(j - 1)) * X(j - 2) + X(j - 1) + 1
            total += weight * (X(j) + (1 - X(j)) * hit)
        else:
            total += X(2) + (1 - X(2)) * hit
    return total


def _bernoulli_p(m):
    if isinstance(m, ContaminationModel):
        return float(m.p)
    return float(check_probability(m, closed=True))


def _block_sizes(reps):
    full, rest = divmod(reps, STREAM_BLOCK)
    return [STREAM_BLOCK] * full + ([rest] if rest else [])


def _block_rng(seed, block):
    return np.random.default_rng([seed, block])


def sample_patterns(m, n, reps, seed):
    """Yield ``reps`` i.i.d. Bernoulli(p) patterns of length ``n``.

    ``m`` is a :class:`ContaminationModel` or a bare probability in
    ``[0, 1]``. Reps are split into blocks of :data:`STREAM_BLOCK`, each drawn
    from the generator seeded with ``(seed, block)``; within a block the
    draws are item-major. :func:`monte_carlo` reproduces the same patterns.
    """
    p = _bernoulli_p(m)
    n = check_count(n, minimum=1)
    reps = check_count(reps, minimum=1, name="reps")
    for b, size in enumerate(_block_sizes(reps)):
        bits = (_block_rng(seed, b).random((n, size)) < p).astype(np.uint8)
        for r in range(size):
            yield DefectPattern(tuple(bits[:, r].tolist()))


def _block_counts(p, n, size, seed, block):
    rng = _block_rng(seed, block)
    t2 = np.zeros(size, dtype=np.int64)
    t1 = np.ones(size, dtype=np.int64)
    prev = None
    for start in range(0, n, _COLUMN_CHUNK):
        cols = rng.random((min(_COLUMN_CHUNK, n - start), size)) < p
        for k in range(cols.shape[0]):
            xk = cols[k]
            if prev is not None:
                t2, t1 = t1, np.where(xk, 2 + t1, 1 + prev + t2)
            prev = xk
    return t1


@dataclass(frozen=True)
class MonteCarloSummary:
    p: float
    n: int
    reps: int
    seed: int
    counts: np.ndarray
    mean: float
    variance: float

    def standardized(self, mu):
        """``sqrt(n) * (T / n - mu)`` for every draw."""
        return np.sqrt(self.n) * (self.counts / self.n - mu)


def monte_carlo(m, n, reps, seed, n_jobs=1):
    """Simulate ``reps`` independent values of ``T_n``.

    Output is identical for any ``n_jobs``; see :func:`sample_patterns` for
    the stream layout.
    """
    p = _bernoulli_p(m)
    n = check_count(n, minimum=1)
    reps = check_count(reps, minimum=2, name="reps")
    sizes = _block_sizes(reps)
    if n_jobs == 1 or len(sizes) == 1:
        parts = [_block_counts(p, n, s, seed, b) for b, s in enumerate(sizes)]
    else:
        parts = Parallel(n_jobs=n_jobs)(
            delayed(_block_counts)(p, n, s, seed, b) for b, s in enumerate(sizes)
        )
    counts = np.concatenate(parts)
    return MonteCarloSummary(
        p=p,
        n=n,
        reps=reps,
        seed=seed,
        counts=counts,
        mean=float(counts.mean()),
        variance=float(counts.var(ddof=1)),
    )
