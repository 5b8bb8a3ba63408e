"""Input validation helpers shared by the public functions and estimators."""

import math
import numbers
from fractions import Fraction

import numpy as np


class CapacityError(ArithmeticError):
    """Raised when a plain floating-point evaluation leaves the representable range."""


def check_probability(p, *, closed=False, name="p"):
    """Validate a probability.

    ``closed=False`` requires ``0 < p < 1`` (the contamination model domain);
    ``closed=True`` admits the endpoints, which the Bernoulli sampler uses.
    """
    if isinstance(p, (bool, np.bool_)) or not isinstance(p, numbers.Real):
        raise TypeError(f"{name} must be a real number, got {type(p).__name__}")
    if not isinstance(p, Fraction) and not math.isfinite(float(p)):
        raise ValueError(f"{name} must be finite, got {p!r}")
    if closed:
        if not 0 <= p <= 1:
            raise ValueError(f"{name} must lie in [0, 1], got {p!r}")
    elif not 0 < p < 1:
        raise ValueError(f"{name} must lie in the open interval (0, 1), got {p!r}")
    return p


def check_count(n, *, minimum=0, name="n"):
    if isinstance(n, (bool, np.bool_)) or not isinstance(n, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {type(n).__name__}")
    n = int(n)
    if n < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {n}")
    return n


def check_finite(value, *, name="lambda"):
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


def check_patterns(X, *, allow_empty=False):
    """Coerce ``X`` into a 2-D uint8 array of 0/1 defect indicators.

    A 1-D input is treated as a single pattern.
    """
    arr = np.asarray(X)
    if arr.ndim == 1:
        arr = arr[np.newaxis, :]
    if arr.ndim != 2:
        raise ValueError(f"defect patterns must be 1-D or 2-D, got shape {arr.shape}")
    if arr.shape[1] == 0 and not allow_empty:
        raise ValueError("defect patterns must contain at least one item")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError("defect indicators must be 0 or 1")
    return arr.astype(np.uint8, copy=False)
