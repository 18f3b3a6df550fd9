"""Global and local explanations for tree ensembles."""

from .attribution import (
    Attribution,
    brute_force_shap,
    ensure_covers,
    recompute_covers,
    shap_values,
    shap_values_batch,
)
from .importance import ImportanceReport, gain_importance, global_shap_importance
from .dependence import DependenceData, PdpCurve, pdp, shap_dependence

__all__ = [
    "Attribution",
    "shap_values",
    "shap_values_batch",
    "brute_force_shap",
    "ensure_covers",
    "recompute_covers",
    "ImportanceReport",
    "gain_importance",
    "global_shap_importance",
    "PdpCurve",
    "pdp",
    "DependenceData",
    "shap_dependence",
]
