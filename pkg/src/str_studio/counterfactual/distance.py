"""Mixed-type distance between encoded instances.

Gower-style: numeric features contribute |x - x'| / scale (scale = the
feature's schema range by default, or MAD over a dataset if configured),
categoricals contribute a fixed mismatch cost when the codes differ.
MISSING equals nothing except MISSING.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import SchemaError
from ..ingest.types import Dataset, FeatureSchema


@dataclass
class DistanceSpec:
    schema: FeatureSchema
    scales: np.ndarray  # per-feature; categorical slots hold 1.0
    weights: np.ndarray  # per-feature, >= 0
    mismatch_cost: float = 1.0

    @classmethod
    def from_schema(
        cls, schema: FeatureSchema, weights=None, mismatch_cost: float = 1.0
    ) -> "DistanceSpec":
        scales = np.ones(schema.d)
        for i, f in enumerate(schema.features):
            if f.kind == "numeric":
                lo, hi = f.value_range
                scales[i] = hi - lo
        w = np.ones(schema.d) if weights is None else np.asarray(weights, dtype=float)
        if np.any(w < 0):
            raise SchemaError("distance weights must be >= 0")
        return cls(schema=schema, scales=scales, weights=w, mismatch_cost=mismatch_cost)

    @classmethod
    def from_mad(
        cls, schema: FeatureSchema, dataset: Dataset, weights=None, mismatch_cost: float = 1.0
    ) -> "DistanceSpec":
        """Median-absolute-deviation scales measured on a dataset."""
        spec = cls.from_schema(schema, weights=weights, mismatch_cost=mismatch_cost)
        X = dataset.matrices()[0]
        for i, f in enumerate(schema.features):
            if f.kind == "numeric":
                col = X[:, i]
                col = col[~np.isnan(col)]
                if col.size:
                    mad = float(np.median(np.abs(col - np.median(col))))
                    if mad > 0:
                        spec.scales[i] = mad
        return spec

    def is_categorical(self, i: int) -> bool:
        return self.schema.features[i].kind == "categorical"


def distance(x, x_prime, spec: DistanceSpec) -> float:
    """Weighted per-feature deltas, summed."""
    x = np.asarray(x, dtype=float)
    x_prime = np.asarray(x_prime, dtype=float)
    if x.shape != x_prime.shape:
        raise SchemaError("distance requires equal-length vectors")
    total = 0.0
    for i in range(len(x)):
        a, b = x[i], x_prime[i]
        a_nan, b_nan = np.isnan(a), np.isnan(b)
        if a_nan and b_nan:
            continue
        if spec.is_categorical(i):
            if a_nan != b_nan or (not a_nan and a != b):
                total += spec.weights[i] * spec.mismatch_cost
        else:
            if a_nan != b_nan:
                total += spec.weights[i] * spec.mismatch_cost
            elif a != b:
                if spec.scales[i] <= 0:
                    raise SchemaError(
                        f"feature '{spec.schema.features[i].name}' has zero scale but differing values"
                    )
                total += spec.weights[i] * abs(a - b) / spec.scales[i]
    return total


def distance_batch(x, rows: np.ndarray, spec: DistanceSpec) -> np.ndarray:
    """`distance` for each row of a candidate matrix, vectorized.

    Raises on zero-scale numeric differences like the scalar version, but
    only when such a difference actually occurs.
    """
    x = np.asarray(x, dtype=float)
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.shape[1] != x.shape[0]:
        raise SchemaError("distance requires equal-length vectors")
    cat = np.array([spec.is_categorical(i) for i in range(len(x))])
    x_nan = np.isnan(x)
    r_nan = np.isnan(rows)
    both_nan = x_nan & r_nan
    one_nan = x_nan ^ r_nan
    equal = (rows == x) | both_nan

    mismatch = (~equal) & (cat | one_nan)
    total = (mismatch * spec.weights * spec.mismatch_cost).sum(axis=1)

    num_diff = (~equal) & ~cat & ~one_nan
    if num_diff.any():
        bad = num_diff.any(axis=0) & (spec.scales <= 0) & ~cat
        if bad.any():
            name = spec.schema.features[int(np.argmax(bad))].name
            raise SchemaError(f"feature '{name}' has zero scale but differing values")
        scaled = np.where(num_diff, np.abs(np.where(r_nan, 0.0, rows) - np.where(x_nan, 0.0, x)), 0.0)
        total = total + (scaled / np.where(spec.scales > 0, spec.scales, 1.0) * spec.weights).sum(axis=1)
    return total
