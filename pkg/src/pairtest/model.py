"""Contamination model and the optimality regime of pairwise testing."""

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

from ._validation import check_probability

PTA_LOWER = (2.0 - math.sqrt(2.0)) / 2.0
PTA_UPPER = (3.0 - math.sqrt(5.0)) / 2.0


def _check_constants():
    # Residuals of 2l^2 - 4l + 1 and u^2 - 3u + 1, measured in ulps of the
    # largest term in each polynomial.
    lo = 2 * PTA_LOWER**2 - 4 * PTA_LOWER + 1
    up = PTA_UPPER**2 - 3 * PTA_UPPER + 1
    if abs(lo) > 4 * math.ulp(4 * PTA_LOWER) or abs(up) > 4 * math.ulp(3 * PTA_UPPER):
        raise AssertionError("regime constants fail their defining polynomials")
    if not PTA_LOWER < PTA_UPPER:
        raise AssertionError("regime constants out of order")


_check_constants()


class RegimeKind(enum.IntEnum):
    # Ordered by increasing p; classify_regime is monotone in this index.
    BelowPtaWindow = 0
    PtaOptimalNested = 1
    IndividualTestingOptimal = 2


@dataclass(frozen=True)
class Regime:
    kind: RegimeKind
    lower: float = PTA_LOWER
    upper: float = PTA_UPPER


@dataclass(frozen=True)
class ContaminationModel:
    """Items are i.i.d. defective with probability ``p``.

    ``q = 1 - p`` is computed once at construction so every formula downstream
    sees the same value. ``p`` may be a :class:`fractions.Fraction`, in which
    case ``q`` is exact as well.
    """

    p: float
    q: float = field(init=False)

    def __post_init__(self):
        check_probability(self.p)
        object.__setattr__(self, "q", 1 - self.p)

    @property
    def is_exact(self):
        return isinstance(self.p, Fraction)

    def as_float(self):
        """Return the same model with ``p`` converted to a float."""
        return self if not self.is_exact else ContaminationModel(float(self.p))


def new_model(p):
    """Build a :class:`ContaminationModel`, rejecting ``p`` outside ``(0, 1)``."""
    return ContaminationModel(p)


def classify_regime(m):
    """Locate ``m.p`` relative to the closed window where PTA is the optimal nested algorithm."""
    if m.p < PTA_LOWER:
        kind = RegimeKind.BelowPtaWindow
    elif m.p <= PTA_UPPER:
        kind = RegimeKind.PtaOptimalNested
    else:
        kind = RegimeKind.IndividualTestingOptimal
    return Regime(kind)


@dataclass(frozen=True)
class MomentSummary:
    """Mean and variance of ``T_n``.

    ``source`` records how the numbers were obtained: ``"closed_form"``,
    ``"pmf"`` or ``"enumeration"``.
    """

    n: int
    mean: float
    variance: float
    source: str = "closed_form"
