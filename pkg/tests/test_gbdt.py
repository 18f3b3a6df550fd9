"""Boosting core: spec examples, leaf/gain formulas, routing, determinism."""

import numpy as np
import pytest

from str_studio.errors import TrainingError
from str_studio.gbdt import TrainConfig, predict, predict_batch, rmse, train
from str_studio.gbdt.trees import FlatTree
from str_studio.ingest import generate_regression_dataset
from str_studio.ingest.types import Dataset, EncodedInstance, FeatureSchema, FeatureSpec, LabeledInstance


def make_dataset(X, y, w=None):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    schema = FeatureSchema(
        [FeatureSpec(f"f{i}", "numeric", value_range=(float(np.nanmin(X[:, i])), float(np.nanmax(X[:, i]))))
         for i in range(X.shape[1])]
    )
    w = np.ones(len(y)) if w is None else w
    rows = [LabeledInstance(EncodedInstance(X[i]), float(y[i]), float(w[i])) for i in range(len(y))]
    return Dataset(schema, rows)


def test_hand_example_single_split():
    ds = make_dataset([1, 2, 3, 4], [0, 0, 1, 1])
    model = train(ds, TrainConfig(n_rounds=1, max_depth=1, learning_rate=1.0, l2_leaf_reg=0.0))
    root = model.trees[0]
    assert 2 < root.threshold <= 3
    assert model.base_score == 0.5
    assert sorted([root.left.value, root.right.value]) == [-0.5, 0.5]
    assert [predict(model, [v]) for v in (1.0, 2.0, 3.0, 4.0)] == [0.0, 0.0, 1.0, 1.0]


def test_constant_targets_yield_zero_trees():
    ds = make_dataset([1, 2, 3, 4], [0.7] * 4)
    model = train(ds, TrainConfig(n_rounds=5, max_depth=3, min_split_gain=0.1))
    assert model.trees == []
    assert predict(model, [99.0]) == pytest.approx(0.7)


def test_leaf_value_formula_with_regularization():
    # one admissible split, lambda=1: leaf = sum(w g) / (sum(w) + 1)
    ds = make_dataset([1, 1, 2, 2], [1, 1, 3, 3])
    model = train(ds, TrainConfig(n_rounds=1, max_depth=1, learning_rate=1.0, l2_leaf_reg=1.0))
    root = model.trees[0]
    # base = 2; residuals left {-1,-1}: leaf = -2/(2+1); right {1,1}: 2/3
    assert root.left.value == pytest.approx(-2 / 3)
    assert root.right.value == pytest.approx(2 / 3)


def test_non_finite_inputs_rejected():
    ds = make_dataset([1, 2], [np.inf, 0])
    with pytest.raises(TrainingError, match="target"):
        train(ds, TrainConfig(n_rounds=1))


def test_min_child_weight_blocks_small_children():
    ds = make_dataset([1, 2, 3, 4], [0, 0, 0, 1])
    model = train(ds, TrainConfig(n_rounds=1, max_depth=1, min_child_weight=2.0))
    if model.trees:
        root = model.trees[0]
        assert root.threshold == pytest.approx(2.5)  # 1/3 split barred, 2/2 allowed


def test_missing_values_route_to_learned_default():
    X = np.array([[1.0], [2.0], [3.0], [4.0], [np.nan], [np.nan]])
    y = np.array([0, 0, 1, 1, 1, 1], dtype=float)
    ds = make_dataset(X, y)
    model = train(ds, TrainConfig(n_rounds=3, max_depth=2, learning_rate=1.0, l2_leaf_reg=0.0))
    # missing rows share the high-target group, so default must route right
    assert predict(model, [np.nan]) == pytest.approx(1.0)
    assert predict(model, [1.0]) == pytest.approx(0.0)


def test_missing_prediction_equals_default_side_value():
    ds, _ = generate_regression_dataset(300, seed=1, noise=0.1)
    model = train(ds, TrainConfig(n_rounds=10, max_depth=3, seed=0))
    x = ds.rows[0].instance.values.copy()
    for tree in model.trees:
        node = tree
        while not node.is_leaf:
            if node.feature_index == 0:
                break
            node = node.left if (x[node.feature_index] < node.threshold) else node.right
    x_missing = x.copy()
    x_missing[0] = np.nan
    # equality with an instance forced to the default side of every split on f0
    def route(tree, x, force_default_for):
        node = tree
        while not node.is_leaf:
            if node.feature_index == force_default_for:
                node = node.left if node.default_left else node.right
            else:
                v = x[node.feature_index]
                node = (node.left if node.default_left else node.right) if np.isnan(v) else (
                    node.left if v < node.threshold else node.right
                )
        return node.value
    expect = model.base_score + model.learning_rate * sum(route(t, x, 0) for t in model.trees)
    assert predict(model, x_missing) == pytest.approx(expect, abs=1e-12)


def test_predict_batch_equals_loop(small_model, small_dataset):
    X = small_dataset.matrices()[0][:200]
    batch = predict_batch(small_model, X)
    loop = np.array([predict(small_model, X[i]) for i in range(len(X))])
    assert np.array_equal(batch, loop)


def test_predict_length_mismatch_errors(small_model):
    with pytest.raises(TrainingError, match="features"):
        predict(small_model, np.zeros(small_model.n_features + 1))


def test_depth0_ensemble_returns_base(small_dataset):
    model = train(small_dataset, TrainConfig(n_rounds=0))
    X, y, w = small_dataset.matrices()
    assert np.allclose(predict_batch(model, X), np.sum(w * y) / np.sum(w))


def test_rmse_closed_forms():
    ds = make_dataset([1, 2], [0, 1])
    model = train(ds, TrainConfig(n_rounds=0))
    model.base_score = 0.0
    assert rmse(model, ds) == pytest.approx(np.sqrt(0.5))
    exact = train(ds, TrainConfig(n_rounds=1, max_depth=1, learning_rate=1.0, l2_leaf_reg=0.0))
    assert rmse(exact, ds) == 0.0


def test_rmse_matches_recomputation(small_model, small_dataset):
    X, y, _ = small_dataset.matrices()
    manual = float(np.sqrt(np.mean((predict_batch(small_model, X) - y) ** 2)))
    assert rmse(small_model, small_dataset) == pytest.approx(manual, abs=1e-15)


def test_training_rmse_monotone_on_seeded_datasets():
    for seed in range(6):
        ds, _ = generate_regression_dataset(200, seed=seed, noise="hetero")
        model = train(ds, TrainConfig(n_rounds=25, max_depth=3, learning_rate=0.3, seed=seed))
        curve = model.training_rmse
        assert all(curve[i + 1] <= curve[i] + 1e-12 for i in range(len(curve) - 1))


def replay_leaf_values(model, dataset):
    """Independent replay: every leaf must equal (sum w g)/(sum w + reg)."""
    X, y, w = dataset.matrices()
    lam = model.train_config.l2_leaf_reg
    yhat = np.full(len(y), model.base_score)
    for tree in model.trees:
        g = y - yhat
        stack = [(tree, np.arange(len(y)))]
        while stack:
            node, rows = stack.pop()
            if node.is_leaf:
                expect = np.sum(w[rows] * g[rows]) / (np.sum(w[rows]) + lam)
                assert node.value == expect  # exact replay, same float ops
                assert node.cover == np.sum(w[rows])
            else:
                v = X[rows, node.feature_index]
                go_left = np.where(np.isnan(v), node.default_left, v < node.threshold)
                stack.append((node.left, rows[go_left]))
                stack.append((node.right, rows[~go_left]))
        yhat = yhat + model.learning_rate * FlatTree(tree).evaluate_batch(X)


def test_leaf_values_match_replay_oracle():
    ds, _ = generate_regression_dataset(150, seed=11, noise="hetero")
    for lam in (0.0, 1.0):
        model = train(ds, TrainConfig(n_rounds=12, max_depth=3, l2_leaf_reg=lam, seed=2))
        replay_leaf_values(model, ds)


def test_split_admissibility():
    ds, _ = generate_regression_dataset(200, seed=4, noise=0.1)
    gamma, mcw = 0.05, 3.0
    model = train(ds, TrainConfig(n_rounds=10, max_depth=4, min_split_gain=gamma,
                                  min_child_weight=mcw, seed=0))
    def check(node):
        if node.is_leaf:
            return
        assert node.gain >= gamma
        assert node.left.cover >= mcw and node.right.cover >= mcw
        check(node.left)
        check(node.right)
    for t in model.trees:
        check(t)


def test_duplicated_row_equals_doubled_weight():
    # dyadic values keep every sum exact, so the models must be identical
    X = np.array([0.25, 0.5, 0.75, 1.0, 1.25, 0.75])
    y = np.array([0.0, 0.5, 0.25, 1.0, 0.125, 0.25])
    dup = make_dataset(np.concatenate([X, [0.75]]), np.concatenate([y, [0.25]]))
    weighted = make_dataset(X, y, w=[1, 1, 2, 1, 1, 1])
    # row 2 and row 5 are the duplicates (value 0.75, target 0.25)
    dup_ds = make_dataset(np.concatenate([X[:3], [0.75], X[3:5]]), np.concatenate([y[:3], [0.25], y[3:5]]))
    w_ds = make_dataset(X[[0, 1, 2, 3, 4]], y[[0, 1, 2, 3, 4]], w=[1, 1, 2, 1, 1])
    cfg = TrainConfig(n_rounds=4, max_depth=2, learning_rate=0.5, l2_leaf_reg=0.0)
    from str_studio.gbdt.serialize import ensemble_to_document
    import json

    a = json.dumps(ensemble_to_document(train(dup_ds, cfg)))
    b = json.dumps(ensemble_to_document(train(w_ds, cfg)))
    assert a == b


def test_training_deterministic_bytes():
    ds, _ = generate_regression_dataset(150, seed=6, noise="hetero")
    cfg = TrainConfig(n_rounds=8, max_depth=3, row_subsample=0.8, seed=123)
    from str_studio.gbdt.serialize import ensemble_to_document
    import json

    a = json.dumps(ensemble_to_document(train(ds, cfg)))
    b = json.dumps(ensemble_to_document(train(ds, cfg)))
    assert a == b
