"""Shared fixtures: one small synthetic catalog and a trained engine."""

from __future__ import annotations

import pytest

from str_studio.gbdt import TrainConfig, train
from str_studio.ingest import (
    SyntheticConfig,
    assemble_dataset,
    export_dataset,
    fit_encoder,
    generate_synthetic_catalog,
    save_catalog,
    split,
)
from str_studio.uncertainty import fit_distribution_estimator, save_estimator

SEASON_YEAR = 2019


@pytest.fixture(scope="session")
def small_catalog():
    cfg = SyntheticConfig(category_sizes={"tops": 90, "dresses": 60}, noise="hetero")
    products, sales, inventory, stores, truth = generate_synthetic_catalog(cfg, seed=42)
    return {
        "config": cfg,
        "products": products,
        "sales": sales,
        "inventory": inventory,
        "stores": stores,
        "truth": truth,
    }


@pytest.fixture(scope="session")
def small_dataset(small_catalog):
    schema = fit_encoder(small_catalog["products"])
    dataset = assemble_dataset(
        small_catalog["products"],
        small_catalog["sales"],
        small_catalog["inventory"],
        schema,
        season_year=SEASON_YEAR,
    )
    return dataset


@pytest.fixture(scope="session")
def small_model(small_dataset):
    return train(small_dataset, TrainConfig(n_rounds=60, max_depth=4, learning_rate=0.12,
                                            l2_leaf_reg=1.0, seed=0))


@pytest.fixture(scope="session")
def engine_dirs(tmp_path_factory, small_catalog, small_dataset):
    """Data dir (CSVs + ingested dataset) and model dir, as the CLI lays them out."""
    data_dir = tmp_path_factory.mktemp("data")
    model_dir = tmp_path_factory.mktemp("models")
    save_catalog(
        data_dir,
        small_catalog["products"],
        small_catalog["sales"],
        small_catalog["inventory"],
        small_catalog["stores"],
    )
    export_dataset(small_dataset, data_dir / "dataset.csv")
    train_base, train_error, _ = split(small_dataset, (0.6, 0.2, 0.2), seed=5)
    estimator = fit_distribution_estimator(
        train_base,
        train_error,
        TrainConfig(n_rounds=60, max_depth=4, learning_rate=0.12, l2_leaf_reg=1.0, seed=0),
        TrainConfig(n_rounds=40, max_depth=3, learning_rate=0.1, l2_leaf_reg=1.0, seed=1),
        clamp_unit=True,
    )
    save_estimator(estimator, model_dir)
    return {"data": data_dir, "models": model_dir}
