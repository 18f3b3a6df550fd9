"""Exact path-dependent TreeSHAP plus a brute-force Shapley oracle.

Both methods attribute the same value function: v(S) is the tree
traversal where features in S follow the instance (MISSING via the
default direction, exactly like prediction) and features outside S are
marginalized by the training-cover proportions recorded at each split.
phi_i are the exact Shapley values of that game; phi_0 = v(empty set),
the cover-weighted mean prediction, so explanations are self-contained
with the model file and need no background sample.

The fast path is the polynomial-time algorithm that walks each root-leaf
path while maintaining, for every path-subset cardinality, the summed
Shapley weight of subsets that size ("extending" the path at each split
and "unwinding" it to read off one feature's contribution at a leaf).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import SchemaError
from ..gbdt.training import TreeEnsemble, predict, _check_instance
from ..gbdt.trees import TreeNode
from ..ingest.types import Dataset, EncodedInstance


@dataclass
class Attribution:
    """base_value + contributions.sum() == predicted (local accuracy)."""

    base_value: float
    contributions: np.ndarray
    predicted: float
    feature_names: Optional[list[str]] = None

    def __post_init__(self):
        self.contributions = np.asarray(self.contributions, dtype=float)

    def to_dict(self) -> dict:
        entry = {
            "base_value": self.base_value,
            "contributions": [float(c) for c in self.contributions],
            "predicted": self.predicted,
        }
        if self.feature_names:
            entry["feature_names"] = list(self.feature_names)
        return entry


def _has_covers(node: TreeNode) -> bool:
    if node.cover is None:
        return False
    if node.is_leaf:
        return True
    return _has_covers(node.left) and _has_covers(node.right)


def ensure_covers(ensemble: TreeEnsemble, background: Optional[Dataset] = None) -> None:
    """Verify cover metadata, recomputing it from `background` if absent."""
    missing = [t for t in ensemble.trees if not _has_covers(t)]
    if not missing:
        return
    if background is None:
        raise SchemaError(
            "model lacks cover metadata; train with gbdt-core or pass a background dataset"
        )
    recompute_covers(ensemble, background)


def recompute_covers(ensemble: TreeEnsemble, background: Dataset) -> None:
    """Set every node's cover to the summed weight of background rows reaching it."""
    X, _, w = background.matrices()
    for tree in ensemble.trees:
        _fill_covers(tree, X, w, np.arange(len(w)))


def _fill_covers(node: TreeNode, X, w, rows) -> None:
    cover = float(np.sum(w[rows]))
    if cover <= 0:
        raise SchemaError("background sample leaves a tree node with zero cover")
    node.cover = cover
    if node.is_leaf:
        return
    v = X[rows, node.feature_index]
    go_left = np.where(np.isnan(v), node.default_left, v < node.threshold)
    _fill_covers(node.left, X, w, rows[go_left])
    _fill_covers(node.right, X, w, rows[~go_left])


def shap_values(
    ensemble: TreeEnsemble, instance, background: Optional[Dataset] = None
) -> Attribution:
    """Exact Shapley attribution of one prediction across features."""
    x = instance.values if isinstance(instance, EncodedInstance) else np.asarray(instance, dtype=float)
    _check_instance(ensemble, x)
    ensure_covers(ensemble, background)
    phi = np.zeros(ensemble.n_features)
    base = ensemble.base_score
    eta = ensemble.learning_rate
    for tree in ensemble.trees:
        tree_phi = np.zeros(ensemble.n_features)
        _tree_shap(tree, x, tree_phi)
        phi += eta * tree_phi
        base += eta * _expected_value(tree)
    predicted = predict(ensemble, x)
    return Attribution(base_value=base, contributions=phi, predicted=predicted)


def shap_values_batch(
    ensemble: TreeEnsemble, dataset: Dataset, background: Optional[Dataset] = None
) -> tuple[float, np.ndarray]:
    """(base_value, n x d contribution matrix) for every dataset row."""
    ensure_covers(ensemble, background)
    X = dataset.matrices()[0]
    base = ensemble.base_score + ensemble.learning_rate * sum(
        _expected_value(t) for t in ensemble.trees
    )
    out = np.zeros((X.shape[0], ensemble.n_features))
    for i in range(X.shape[0]):
        phi = np.zeros(ensemble.n_features)
        for tree in ensemble.trees:
            tree_phi = np.zeros(ensemble.n_features)
            _tree_shap(tree, X[i], tree_phi)
            phi += tree_phi
        out[i] = ensemble.learning_rate * phi
    return float(base), out


def _expected_value(node: TreeNode) -> float:
    if node.is_leaf:
        return node.value
    wl = node.left.cover / node.cover
    return wl * _expected_value(node.left) + (1.0 - wl) * _expected_value(node.right)


# ---------------------------------------------------------------------------
# Fast exact algorithm


def _tree_shap(root: TreeNode, x: np.ndarray, phi: np.ndarray) -> None:
    """Accumulate one tree's Shapley values into phi (unscaled by eta)."""
    _recurse(root, x, phi, [], 1.0, 1.0, -1)


def _extend(path, p_zero, p_one, f_index):
    length = len(path)
    path.append([f_index, p_zero, p_one, 1.0 if length == 0 else 0.0])
    for i in range(length - 1, -1, -1):
        path[i + 1][3] += p_one * path[i][3] * (i + 1) / (length + 1)
        path[i][3] = p_zero * path[i][3] * (length - i) / (length + 1)


def _unwind(path, i):
    """New path with element i removed and weights recomputed."""
    last = len(path) - 1
    z, o = path[i][1], path[i][2]
    out = [row[:] for row in path[:last]]
    n = path[last][3]
    if o != 0.0:
        for j in range(last - 1, -1, -1):
            t = out[j][3]
            out[j][3] = n * (last + 1) / ((j + 1) * o)
            n = t - out[j][3] * z * (last - j) / (last + 1)
    else:
        for j in range(last - 1, -1, -1):
            out[j][3] = out[j][3] * (last + 1) / (z * (last - j))
    for j in range(i, last):
        out[j][0], out[j][1], out[j][2] = path[j + 1][0], path[j + 1][1], path[j + 1][2]
    return out


def _unwound_weight_sum(path, i):
    """Total weight after unwinding element i, without building the path."""
    last = len(path) - 1
    z, o = path[i][1], path[i][2]
    total = 0.0
    if o != 0.0:
        n = path[last][3]
        for j in range(last - 1, -1, -1):
            t = n * (last + 1) / ((j + 1) * o)
            total += t
            n = path[j][3] - t * z * (last - j) / (last + 1)
    else:
        for j in range(last - 1, -1, -1):
            total += path[j][3] * (last + 1) / (z * (last - j))
    return total


def _recurse(node: TreeNode, x, phi, path, p_zero, p_one, f_index):
    path = [row[:] for row in path]
    _extend(path, p_zero, p_one, f_index)
    if node.is_leaf:
        for i in range(1, len(path)):
            w = _unwound_weight_sum(path, i)
            phi[path[i][0]] += w * (path[i][2] - path[i][1]) * node.value
        return
    f = node.feature_index
    v = x[f]
    go_left = node.default_left if np.isnan(v) else bool(v < node.threshold)
    hot, cold = (node.left, node.right) if go_left else (node.right, node.left)
    inherited_zero = inherited_one = 1.0
    k = next((idx for idx in range(1, len(path)) if path[idx][0] == f), None)
    if k is not None:
        inherited_zero, inherited_one = path[k][1], path[k][2]
        path = _unwind(path, k)
    _recurse(hot, x, phi, path, inherited_zero * hot.cover / node.cover, inherited_one, f)
    _recurse(cold, x, phi, path, inherited_zero * cold.cover / node.cover, 0.0, f)


# ---------------------------------------------------------------------------
# Brute-force oracle


def brute_force_shap(ensemble: TreeEnsemble, instance) -> Attribution:
    """Exact Shapley values by full subset enumeration (d <= 15).

    Features never used by any split are dummies of the value function, so
    enumeration runs over the used-feature set only; that changes nothing
    mathematically and keeps 2^d tractable.
    """
    x = instance.values if isinstance(instance, EncodedInstance) else np.asarray(instance, dtype=float)
    _check_instance(ensemble, x)
    if ensemble.n_features > 15:
        raise SchemaError(f"brute force limited to d <= 15 (got {ensemble.n_features})")
    ensure_covers(ensemble)

    used = sorted({f for t in ensemble.trees for f in _split_features(t)})
    phi = np.zeros(ensemble.n_features)
    base = ensemble.base_score
    eta = ensemble.learning_rate
    k = len(used)
    if k == 0:
        for tree in ensemble.trees:
            base += eta * _expected_value(tree)
        return Attribution(base, phi, predict(ensemble, x))

    n_masks = 1 << k
    masks = np.arange(n_masks)
    popcount = np.array([bin(m).count("1") for m in range(n_masks)])
    # Shapley kernel weight by coalition size, for |players| = k
    size_w = np.array([math.factorial(s) * math.factorial(k - 1 - s) / math.factorial(k) for s in range(k)])

    v_total = np.zeros(n_masks)
    for tree in ensemble.trees:
        v_total += eta * _subset_values(tree, x, used, n_masks)
    base += float(v_total[0])

    for bit_pos, f in enumerate(used):
        bit = 1 << bit_pos
        without = masks[(masks & bit) == 0]
        weights = size_w[popcount[without]]
        phi[f] = float(np.sum(weights * (v_total[without | bit] - v_total[without])))
    return Attribution(base_value=base, contributions=phi, predicted=predict(ensemble, x))


def _split_features(node: TreeNode) -> set[int]:
    if node.is_leaf:
        return set()
    return {node.feature_index} | _split_features(node.left) | _split_features(node.right)


def _subset_values(node: TreeNode, x, used, n_masks) -> np.ndarray:
    """v(S) for every subset mask of the used features, one tree, unscaled."""
    if node.is_leaf:
        return np.full(n_masks, node.value)
    left = _subset_values(node.left, x, used, n_masks)
    right = _subset_values(node.right, x, used, n_masks)
    f = node.feature_index
    v = x[f]
    go_left = node.default_left if np.isnan(v) else bool(v < node.threshold)
    hot = left if go_left else right
    wl = node.left.cover / node.cover
    marginal = wl * left + (1.0 - wl) * right
    bit = 1 << used.index(f)
    in_set = (np.arange(n_masks) & bit) != 0
    return np.where(in_set, hot, marginal)
