"""Weighted gradient boosting for squared error.

With a squared-error objective and unit hessians, gradient boosting is
residual boosting: each round fits one tree to g_i = y_i - yhat_i with
per-instance weights, and a leaf's value is (sum w*g) / (sum w + l2_reg).
Split search is exact greedy over sorted unique values (no histograms):
at desk scale this is affordable and keeps training fully deterministic.
Missing values are routed by whichever default direction maximized the
split's gain, trying both sides for every candidate threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import TrainingError
from ..ingest.types import Dataset, EncodedInstance
from .trees import FlatTree, TreeNode


@dataclass(frozen=True)
class TrainConfig:
    n_rounds: int = 100
    max_depth: int = 4
    learning_rate: float = 0.1
    l2_leaf_reg: float = 1.0
    min_split_gain: float = 0.0
    min_child_weight: float = 0.0
    row_subsample: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_rounds < 0:
            raise TrainingError("n_rounds must be >= 0")
        if self.max_depth < 1:
            raise TrainingError("max_depth must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise TrainingError("learning_rate must be in (0, 1]")
        if self.l2_leaf_reg < 0 or self.min_split_gain < 0 or self.min_child_weight < 0:
            raise TrainingError("regularization parameters must be >= 0")
        if not 0.0 < self.row_subsample <= 1.0:
            raise TrainingError("row_subsample must be in (0, 1]")

    def to_dict(self) -> dict:
        return {
            "n_rounds": self.n_rounds,
            "max_depth": self.max_depth,
            "learning_rate": self.learning_rate,
            "l2_leaf_reg": self.l2_leaf_reg,
            "min_split_gain": self.min_split_gain,
            "min_child_weight": self.min_child_weight,
            "row_subsample": self.row_subsample,
            "seed": self.seed,
        }


@dataclass
class TreeEnsemble:
    """base_score + learning_rate * sum of tree outputs.

    Leaf values are stored unscaled; the learning rate is applied at
    prediction time so model dumps stay readable.
    """

    base_score: float
    trees: list[TreeNode]
    learning_rate: float
    n_features: int
    schema_fingerprint: str = ""
    train_config: Optional[TrainConfig] = None
    training_rmse: list[float] = field(default_factory=list)

    def __post_init__(self):
        self._flat: Optional[list[FlatTree]] = None

    def flat_trees(self) -> list[FlatTree]:
        if self._flat is None:
            self._flat = [FlatTree(t) for t in self.trees]
        return self._flat


def _check_instance(ensemble: TreeEnsemble, values: np.ndarray):
    if values.shape[-1] != ensemble.n_features:
        raise TrainingError(
            f"instance has {values.shape[-1]} features, model expects {ensemble.n_features}"
        )


def predict(ensemble: TreeEnsemble, instance) -> float:
    """Score one instance (EncodedInstance or raw vector)."""
    x = instance.values if isinstance(instance, EncodedInstance) else np.asarray(instance, dtype=float)
    _check_instance(ensemble, x)
    total = ensemble.base_score
    for tree in ensemble.trees:
        total += ensemble.learning_rate * tree.evaluate(x)
    return float(total)


def predict_batch(ensemble: TreeEnsemble, instances) -> np.ndarray:
    """Vectorized scoring; elementwise equal to repeated `predict` calls."""
    if isinstance(instances, Dataset):
        X = instances.matrices()[0]
    elif isinstance(instances, np.ndarray):
        X = np.atleast_2d(instances)
    else:
        X = np.array(
            [i.values if isinstance(i, EncodedInstance) else np.asarray(i, dtype=float) for i in instances]
        )
        X = np.atleast_2d(X)
    _check_instance(ensemble, X)
    out = np.full(X.shape[0], ensemble.base_score, dtype=float)
    for flat in ensemble.flat_trees():
        out += ensemble.learning_rate * flat.evaluate_batch(X)
    return out


def rmse(ensemble: TreeEnsemble, dataset: Dataset) -> float:
    """Unweighted root-mean-squared error over the dataset rows."""
    if len(dataset) == 0:
        raise TrainingError("rmse needs a non-empty dataset")
    X, y, _ = dataset.matrices()
    pred = predict_batch(ensemble, X)
    return float(np.sqrt(np.mean((pred - y) ** 2)))


def train(dataset: Dataset, config: TrainConfig, schema_fingerprint: str | None = None) -> TreeEnsemble:
    """Fit a boosted ensemble; deterministic given (dataset, config).

    base_score is the weighted target mean. A round whose tree finds no
    admissible split adds nothing; with full-row sampling nothing can
    change in later rounds either, so training stops early.
    """
    if len(dataset) == 0:
        raise TrainingError("cannot train on an empty dataset")
    X, y, w = dataset.matrices()
    if not np.all(np.isfinite(y)):
        raise TrainingError("non-finite target values")
    if not np.all(np.isfinite(w)) or not np.all(w > 0):
        raise TrainingError("weights must be finite and > 0")

    base = float(np.sum(w * y) / np.sum(w))
    yhat = np.full(len(y), base)
    rng = np.random.default_rng(config.seed)
    fingerprint = dataset.schema.fingerprint() if schema_fingerprint is None else schema_fingerprint

    ensemble = TreeEnsemble(
        base_score=base,
        trees=[],
        learning_rate=config.learning_rate,
        n_features=X.shape[1],
        schema_fingerprint=fingerprint,
        train_config=config,
    )
    ensemble.training_rmse.append(_weighted_rmse(y, yhat, w))

    n = len(y)
    for _ in range(config.n_rounds):
        if config.row_subsample < 1.0:
            size = max(1, int(n * config.row_subsample))
            rows = np.sort(rng.choice(n, size=size, replace=False))
        else:
            rows = np.arange(n)
        g = y - yhat
        root = _build_tree(X, g, w, rows, config, depth=0)
        if root.is_leaf:
            if config.row_subsample >= 1.0:
                break
            continue
        ensemble.trees.append(root)
        ensemble._flat = None
        yhat = yhat + config.learning_rate * FlatTree(root).evaluate_batch(X)
        ensemble.training_rmse.append(_weighted_rmse(y, yhat, w))
    return ensemble


def _weighted_rmse(y, yhat, w) -> float:
    return float(np.sqrt(np.sum(w * (y - yhat) ** 2) / np.sum(w)))


def _build_tree(X, g, w, rows, config: TrainConfig, depth: int) -> TreeNode:
    wg = w[rows] * g[rows]
    G = float(np.sum(wg))
    H = float(np.sum(w[rows]))
    if depth >= config.max_depth or len(rows) < 2:
        return TreeNode(value=G / (H + config.l2_leaf_reg), cover=H)

    best = _best_split(X, g, w, rows, config)
    if best is None:
        return TreeNode(value=G / (H + config.l2_leaf_reg), cover=H)

    feature, threshold, default_left, gain = best
    v = X[rows, feature]
    miss = np.isnan(v)
    go_left = np.where(miss, default_left, v < threshold)
    left_rows = rows[go_left]
    right_rows = rows[~go_left]
    return TreeNode(
        feature_index=feature,
        threshold=threshold,
        default_left=default_left,
        gain=gain,
        cover=H,
        left=_build_tree(X, g, w, left_rows, config, depth + 1),
        right=_build_tree(X, g, w, right_rows, config, depth + 1),
    )


def _best_split(X, g, w, rows, config: TrainConfig):
    """Exact greedy search over all (feature, threshold, default) triples.

    Gain is the regularized variance reduction
    GL^2/(HL+reg) + GR^2/(HR+reg) - G^2/(H+reg); a split is admissible if
    gain >= min_split_gain, gain > 0, and both children carry at least
    min_child_weight total weight. Ties break deterministically: lower
    feature index, then lower threshold, then default-left.
    """
    wg_all = w[rows] * g[rows]
    w_all = w[rows]
    G = float(np.sum(wg_all))
    H = float(np.sum(w_all))
    lam = config.l2_leaf_reg
    mcw = config.min_child_weight
    parent_score = G * G / (H + lam)

    best = None  # (gain, feature, threshold, default_left)
    for j in range(X.shape[1]):
        v = X[rows, j]
        miss = np.isnan(v)
        if miss.all():
            continue
        Gm = float(np.sum(wg_all[miss]))
        Hm = float(np.sum(w_all[miss]))
        pv = v[~miss]
        order = np.argsort(pv, kind="stable")
        sv = pv[order]
        csg = np.cumsum(wg_all[~miss][order])
        csw = np.cumsum(w_all[~miss][order])
        cuts = np.nonzero(sv[:-1] < sv[1:])[0]
        if cuts.size == 0:
            continue
        GL0, HL0 = csg[cuts], csw[cuts]
        Gp, Hp = csg[-1], csw[-1]
        thresholds = (sv[cuts] + sv[cuts + 1]) / 2.0

        # Missing routed left
        HLl, HRl = HL0 + Hm, Hp - HL0
        GLl, GRl = GL0 + Gm, Gp - GL0
        gain_l = GLl ** 2 / (HLl + lam) + GRl ** 2 / (HRl + lam) - parent_score
        gain_l = np.where((HLl >= mcw) & (HRl >= mcw), gain_l, -np.inf)
        # Missing routed right
        HLr, HRr = HL0, Hp - HL0 + Hm
        GLr, GRr = GL0, Gp - GL0 + Gm
        gain_r = GLr ** 2 / (HLr + lam) + GRr ** 2 / (HRr + lam) - parent_score
        gain_r = np.where((HLr >= mcw) & (HRr >= mcw), gain_r, -np.inf)

        take_left = gain_l >= gain_r
        gain_best = np.where(take_left, gain_l, gain_r)
        k = int(np.argmax(gain_best))
        gain = float(gain_best[k])
        if gain >= config.min_split_gain and gain > 0.0:
            if best is None or gain > best[0]:
                best = (gain, j, float(thresholds[k]), bool(take_left[k]))
    if best is None:
        return None
    gain, j, thr, default_left = best
    return j, thr, default_left, gain
