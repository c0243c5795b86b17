"""Coding-pattern detector family over the provider-by-ICD matrix."""

from .substitutability import apply_substitutability, build_feature_matrix, build_substitutability
from .detectors import (
    DetectorScores,
    DETECTOR_NAMES,
    iforest_scores,
    loda_scores,
    rrcf_scores,
    rshash_scores,
    run_all_detectors,
    scores_to_ranklist,
    sod_scores,
    fuse_subspace_rankings,
)
from .explain import (
    DollarContextTable,
    ShapExplanation,
    fit_surrogate,
    icd_dollar_context,
    shap_explain,
)

__all__ = [
    "DetectorScores", "DETECTOR_NAMES", "DollarContextTable", "ShapExplanation",
    "apply_substitutability", "build_feature_matrix", "build_substitutability",
    "fit_surrogate", "fuse_subspace_rankings", "icd_dollar_context",
    "iforest_scores", "loda_scores", "rrcf_scores", "rshash_scores",
    "run_all_detectors", "scores_to_ranklist", "shap_explain", "sod_scores",
]
