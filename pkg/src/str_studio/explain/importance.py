"""Global feature importance: split-gain totals and mean-|SHAP|.

The two methods can legitimately disagree on ranking; mean-|SHAP| is the
default surfaced to designers, gain the option for advanced users.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import SchemaError
from ..gbdt.training import TreeEnsemble
from ..gbdt.trees import TreeNode
from ..ingest.types import Dataset
from .attribution import shap_values_batch


@dataclass
class ImportanceReport:
    method: str  # "gain" | "mean_abs_shap"
    scores: np.ndarray  # normalized, sums to 1
    raw: np.ndarray  # pre-normalization scores
    feature_names: Optional[list[str]] = None

    def ranking(self) -> list[int]:
        """Feature indices, most important first; ties by index."""
        return list(np.lexsort((np.arange(len(self.scores)), -self.scores)))

    def to_dict(self) -> dict:
        out = {
            "method": self.method,
            "scores": [float(s) for s in self.scores],
            "raw": [float(s) for s in self.raw],
        }
        if self.feature_names:
            out["feature_names"] = list(self.feature_names)
        return out


def _normalize(raw: np.ndarray, method: str) -> ImportanceReport:
    total = raw.sum()
    if total <= 0:
        raise SchemaError(f"{method} importance undefined: no nonzero scores")
    return ImportanceReport(method=method, scores=raw / total, raw=raw)


def gain_importance(ensemble: TreeEnsemble) -> ImportanceReport:
    """Per-feature sum of recorded split gains, normalized to sum 1."""
    raw = np.zeros(ensemble.n_features)
    n_splits = 0
    for tree in ensemble.trees:
        n_splits += _accumulate_gain(tree, raw)
    if n_splits == 0:
        raise SchemaError("gain importance needs at least one split")
    return _normalize(raw, "gain")


def _accumulate_gain(node: TreeNode, raw: np.ndarray) -> int:
    if node.is_leaf:
        return 0
    if node.gain is None:
        raise SchemaError("split-gain metadata absent; model was not trained by gbdt-core")
    raw[node.feature_index] += node.gain
    return 1 + _accumulate_gain(node.left, raw) + _accumulate_gain(node.right, raw)


def global_shap_importance(ensemble: TreeEnsemble, dataset: Dataset) -> ImportanceReport:
    """Mean absolute SHAP value per feature over the dataset, normalized."""
    if len(dataset) == 0:
        raise SchemaError("global SHAP importance needs a non-empty dataset")
    _, phi = shap_values_batch(ensemble, dataset)
    raw = np.mean(np.abs(phi), axis=0)
    report = _normalize(raw, "mean_abs_shap")
    report.feature_names = dataset.schema.feature_names
    return report
