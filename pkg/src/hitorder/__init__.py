"""Stochastic comparison of hitting times for absorbing Markov chains."""

from __future__ import annotations

from .coupling import CoupledPath, estimate_gap, sample_coupled, verify_pathwise
from .errors import HitOrderError
from .hitting import (
    HittingDistribution,
    certify_ast_order,
    expected_hitting,
    falsify_order,
    hitting_cdf,
)
from .matrix_core import StochMatrix, is_ergodic, is_skip_free, mat_pow, taboo, validate
from .spectral import Prediction, large_deviation_rate, spectral_summary, vicev_predict
from .stochastic_order import (
    OrderCertificate,
    VedereWitness,
    Verdict,
    certify_st_order,
    check_serve,
    check_vedere,
    find_coprime_pair,
    frobenius_threshold,
    is_stoch_monotone,
    rowwise_dominates,
    st_leq,
    triangle_leq,
)
from .words import (
    LeadingNumber,
    Word,
    alphabet_extension_preserves,
    compare_words,
    conway_mean,
    extremal_words,
    leading_number,
    minimal_alphabet,
    substitute_by_leading,
    word_chain,
)

__all__ = [
    "CoupledPath",
    "HitOrderError",
    "HittingDistribution",
    "LeadingNumber",
    "OrderCertificate",
    "Prediction",
    "StochMatrix",
    "VedereWitness",
    "Verdict",
    "Word",
    "alphabet_extension_preserves",
    "certify_ast_order",
    "certify_st_order",
    "check_serve",
    "check_vedere",
    "compare_words",
    "conway_mean",
    "estimate_gap",
    "expected_hitting",
    "extremal_words",
    "falsify_order",
    "find_coprime_pair",
    "frobenius_threshold",
    "hitting_cdf",
    "is_ergodic",
    "is_skip_free",
    "is_stoch_monotone",
    "large_deviation_rate",
    "leading_number",
    "mat_pow",
    "minimal_alphabet",
    "rowwise_dominates",
    "sample_coupled",
    "spectral_summary",
    "st_leq",
    "substitute_by_leading",
    "taboo",
    "triangle_leq",
    "validate",
    "verify_pathwise",
    "vicev_predict",
    "word_chain",
]
