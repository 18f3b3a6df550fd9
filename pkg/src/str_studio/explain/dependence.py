"""Partial dependence and SHAP dependence data (tabular; rendering is the
CLI's and UI's job)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import SchemaError
from ..gbdt.training import TreeEnsemble, predict_batch
from ..ingest.types import Dataset
from .attribution import shap_values_batch

DEFAULT_PDP_POINTS = 20


@dataclass
class PdpCurve:
    feature_index: int
    grid: np.ndarray
    averaged_predictions: np.ndarray
    n_background: int
    feature_name: str = ""

    def to_dict(self) -> dict:
        return {
            "feature_index": self.feature_index,
            "feature_name": self.feature_name,
            "grid": [float(v) for v in self.grid],
            "averaged_predictions": [float(v) for v in self.averaged_predictions],
            "n_background": self.n_background,
        }


def default_grid_for(dataset: Dataset, feature: int, points: int = DEFAULT_PDP_POINTS) -> np.ndarray:
    """Quantile-spaced grid for numerics; all codes 1..K for categoricals."""
    spec = dataset.schema.features[feature]
    if spec.kind == "categorical":
        return np.arange(1, spec.n_codes + 1, dtype=float)
    col = dataset.matrices()[0][:, feature]
    col = col[~np.isnan(col)]
    if col.size == 0:
        raise SchemaError(f"feature '{spec.name}' has no observed values")
    qs = np.linspace(0.0, 1.0, points)
    return np.unique(np.quantile(col, qs))


def pdp(ensemble: TreeEnsemble, dataset: Dataset, feature: int, grid=None) -> PdpCurve:
    """Average prediction when every row is forced to each grid value."""
    if not 0 <= feature < dataset.schema.d:
        raise SchemaError(f"feature index {feature} out of range (d={dataset.schema.d})")
    if grid is None:
        grid = default_grid_for(dataset, feature)
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise SchemaError("pdp grid must be non-empty")
    spec = dataset.schema.features[feature]
    if spec.kind == "numeric" and np.any(np.diff(grid) <= 0):
        raise SchemaError("numeric pdp grid must be strictly increasing")
    X = dataset.matrices()[0]
    means = np.empty(grid.size)
    forced = X.copy()
    for i, value in enumerate(grid):
        forced[:, feature] = value
        means[i] = float(np.mean(predict_batch(ensemble, forced)))
    return PdpCurve(
        feature_index=feature,
        grid=grid,
        averaged_predictions=means,
        n_background=X.shape[0],
        feature_name=spec.name,
    )


@dataclass
class DependenceData:
    """Per-row (feature value, phi) points; rows with MISSING kept apart."""

    feature_index: int
    points: list[tuple[float, float]]
    missing_phi: list[float]
    feature_name: str = ""

    def to_dict(self) -> dict:
        return {
            "feature_index": self.feature_index,
            "feature_name": self.feature_name,
            "points": [[float(v), float(p)] for v, p in self.points],
            "missing_phi": [float(p) for p in self.missing_phi],
        }


def shap_dependence(ensemble: TreeEnsemble, dataset: Dataset, feature: int) -> DependenceData:
    if len(dataset) == 0:
        raise SchemaError("shap dependence needs a non-empty dataset")
    if not 0 <= feature < dataset.schema.d:
        raise SchemaError(f"feature index {feature} out of range (d={dataset.schema.d})")
    _, phi = shap_values_batch(ensemble, dataset)
    X = dataset.matrices()[0]
    values = X[:, feature]
    points = []
    missing = []
    for i in range(len(values)):
        if np.isnan(values[i]):
            missing.append(float(phi[i, feature]))
        else:
            points.append((float(values[i]), float(phi[i, feature])))
    return DependenceData(
        feature_index=feature,
        points=points,
        missing_phi=missing,
        feature_name=dataset.schema.features[feature].name,
    )
