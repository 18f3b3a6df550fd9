"""What-if sweeps and genetic-algorithm counterfactual search."""

from .distance import DistanceSpec, distance
from .search import (
    CfRequest,
    CounterfactualResult,
    FeatureChange,
    GaConfig,
    apply_diff,
    diff,
    render_diff_markdown,
    solve_counterfactual,
    what_if_sweep,
)

__all__ = [
    "DistanceSpec",
    "distance",
    "GaConfig",
    "CfRequest",
    "CounterfactualResult",
    "FeatureChange",
    "what_if_sweep",
    "solve_counterfactual",
    "diff",
    "apply_diff",
    "render_diff_markdown",
]
