"""Exact, asymptotic and simulated analysis of the pairwise group-testing algorithm."""

from ._validation import CapacityError
from .analytic import alpha, closed_form_moments, kappa_scalar, log_kappa_scalar, log_mgf, mgf, mgf_blockmatrix
from .asymptotics import AsymptoticConstants, RatePoint, clt_standardize, constants, log_alpha0, rate
from .estimators import CountStandardizer, PairwiseTestCounter, TestCountDistribution
from .exactdist import PmfTable, ProbPolynomial, exact_pmf, exact_pmf_log, kappa_poly, moments_from_pmf
from .model import ContaminationModel, MomentSummary, Regime, RegimeKind, classify_regime, new_model
from .simulator import (
    DefectPattern,
    MonteCarloSummary,
    PtaTrace,
    SemigroupElement,
    explicit_count,
    monte_carlo,
    recurrence_count,
    run_pta,
    sample_patterns,
)

__version__ = "0.1.0"
