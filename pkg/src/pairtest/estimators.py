"""scikit-learn compatible wrappers.

``PairwiseTestCounter`` maps defect-pattern matrices to test counts,
``CountStandardizer`` maps test counts to CLT-standardised scores, and
``TestCountDistribution`` is a density model over test counts. The first two
chain in a :class:`sklearn.pipeline.Pipeline`.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import check_count, check_patterns
from .asymptotics import constants
from .exactdist import exact_pmf, exact_pmf_log
from .model import new_model
from .simulator import explicit_count, recurrence_counts, run_pta

LOG_DOMAIN_THRESHOLD = 300


class PairwiseTestCounter(TransformerMixin, BaseEstimator):
    """Number of tests pairwise testing spends on each row of a 0/1 matrix.

    Parameters
    ----------
    method : {"recurrence", "state_machine", "explicit"}, default="recurrence"
        ``"recurrence"`` is vectorised over rows; the other two evaluate one
        pattern at a time and exist for cross-checking.
    """

    _METHODS = ("recurrence", "state_machine", "explicit")

    def __init__(self, method="recurrence"):
        self.method = method

    def fit(self, X, y=None):
        if self.method not in self._METHODS:
            raise ValueError(f"method must be one of {self._METHODS}, got {self.method!r}")
        X = check_patterns(check_array(X, dtype=None))
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_patterns(check_array(X, dtype=None))
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} items per pattern, expected {self.n_features_in_}"
            )
        if self.method == "recurrence":
            counts = recurrence_counts(X)
        elif self.method == "state_machine":
            counts = np.array([run_pta(row.tolist()).total for row in X])
        else:
            counts = np.array([explicit_count(row.tolist()) for row in X])
        return counts.reshape(-1, 1)

    def get_feature_names_out(self, input_features=None):
        return np.array(["tests"], dtype=object)


class CountStandardizer(TransformerMixin, BaseEstimator):
    """``sqrt(n) (T/n - mu) / sigma`` using the limiting constants, not the data.

    Parameters
    ----------
    p : float
        Contamination probability.
    n_items : int
        Number of items each count was obtained from.
    """

    def __init__(self, p=0.3, n_items=100):
        self.p = p
        self.n_items = n_items

    def fit(self, X=None, y=None):
        self.model_ = new_model(self.p)
        check_count(self.n_items, minimum=1, name="n_items")
        self.constants_ = constants(self.model_)
        if X is not None:
            self.n_features_in_ = check_array(X).shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "constants_")
        T = check_array(X, dtype=np.float64)
        n = self.n_items
        return np.sqrt(n) * (T / n - self.constants_.mu) / np.sqrt(self.constants_.sigma2)

    def inverse_transform(self, X):
        check_is_fitted(self, "constants_")
        Z = check_array(X, dtype=np.float64)
        n = self.n_items
        return n * (Z * np.sqrt(self.constants_.sigma2) / np.sqrt(n) + self.constants_.mu)


class TestCountDistribution(BaseEstimator):
    """Exact law of ``T_n`` exposed like a scikit-learn density estimator.

    Parameters
    ----------
    p : float
        Contamination probability.
    n_items : int
        Number of items, at least 2.
    log_domain : {"auto", True, False}, default="auto"
        ``"auto"`` switches to the log-domain table above 300 items.
    """

    __test__ = False

    def __init__(self, p=0.3, n_items=10, log_domain="auto"):
        self.p = p
        self.n_items = n_items
        self.log_domain = log_domain

    def fit(self, X=None, y=None):
        """Tabulate the distribution; ``X`` is ignored."""
        model = new_model(self.p)
        n = check_count(self.n_items, minimum=2, name="n_items")
        use_log = n > LOG_DOMAIN_THRESHOLD if self.log_domain == "auto" else bool(self.log_domain)
        self.table_ = exact_pmf_log(model, n) if use_log else exact_pmf(model, n)
        self.support_ = self.table_.support
        self.log_pmf_ = self.table_.log_pmf().astype(float)
        return self

    def score_samples(self, X):
        """Log-probability of each observed count (``-inf`` off the support)."""
        check_is_fitted(self, "table_")
        T = np.asarray(check_array(X, ensure_2d=False, dtype=None)).ravel()
        idx = T.astype(np.int64) - self.table_.support_min
        out = np.full(T.shape, -np.inf)
        ok = (T == np.round(T)) & (idx >= 0) & (idx < len(self.log_pmf_))
        out[ok] = self.log_pmf_[idx[ok]]
        return out

    def score(self, X, y=None):
        return float(np.mean(self.score_samples(X)))

    def sample(self, n_samples=1, random_state=None):
        check_is_fitted(self, "table_")
        rng = check_random_state(random_state)
        w = self.table_.pmf()
        return rng.choice(self.support_, size=n_samples, p=w / w.sum()).reshape(-1, 1)
