"""Read-only engine state loaded at service startup.

Model and dataset are immutable once loaded; retraining happens through
the CLI, never the API. Only the draft store appends.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..counterfactual import DistanceSpec
from ..errors import DataValidationError, SchemaError
from ..explain import ImportanceReport, gain_importance, global_shap_importance
from ..gbdt import TreeEnsemble
from ..ingest import (
    Dataset,
    FeatureSchema,
    ProductRecord,
    import_dataset,
    load_inventory,
    load_products,
    load_sales,
    load_stores,
)
from ..ingest.flows import WeeklyFlow, aggregate_flow, launch_week_to_abs, product_flows
from ..ingest.types import PRICE_FEATURE
from ..uncertainty import DistributionEstimator, load_estimator

log = logging.getLogger(__name__)


@dataclass
class EngineState:
    data_dir: Path
    products: dict[str, ProductRecord]
    stores: list
    sales_by_product: dict[str, list]
    inventory_by_product: dict[str, list]
    schema: FeatureSchema
    dataset: Dataset
    estimator: DistributionEstimator
    season_year: Optional[int] = None
    _flows: dict[str, WeeklyFlow] = field(default_factory=dict)
    _importance: dict[str, ImportanceReport] = field(default_factory=dict)
    _str_by_product: Optional[dict[str, float]] = None

    @property
    def base_model(self) -> TreeEnsemble:
        return self.estimator.base_model

    def str_by_product(self) -> dict[str, float]:
        if self._str_by_product is None:
            self._str_by_product = {
                row.instance.product_id: row.target
                for row in self.dataset.rows
                if row.instance.product_id
            }
        return self._str_by_product

    def flow(self, product_id: str) -> WeeklyFlow:
        if product_id not in self._flows:
            self._flows[product_id] = aggregate_flow(
                product_flows(
                    product_id,
                    self.sales_by_product.get(product_id, []),
                    self.inventory_by_product.get(product_id, []),
                )
            )
        return self._flows[product_id]

    def launch_abs_week(self, product: ProductRecord) -> int:
        year = self.season_year
        if year is None:
            events = self.sales_by_product.get(product.product_id, []) + self.inventory_by_product.get(
                product.product_id, []
            )
            if events:
                year = min(e.date for e in events).isocalendar()[0]
            else:
                year = 2019
        return launch_week_to_abs(product.launch_week, year)

    def importance(self, method: str) -> ImportanceReport:
        """Cached; responses stay identical across repeated GETs."""
        if method not in self._importance:
            if method == "gain":
                report = gain_importance(self.base_model)
                report.feature_names = self.schema.feature_names
            elif method == "mean_abs_shap":
                report = global_shap_importance(self.base_model, self.dataset)
            else:
                raise SchemaError(f"unknown importance method '{method}'")
            self._importance[method] = report
        return self._importance[method]

    def distance_spec(self) -> DistanceSpec:
        return DistanceSpec.from_schema(self.schema)

    def price_feature_index(self) -> Optional[int]:
        try:
            return self.schema.index_of(PRICE_FEATURE)
        except SchemaError:
            return None


def load_engine_state(data_dir, model_dir, season_year: Optional[int] = None) -> EngineState:
    """Load the four databases, the ingested dataset, and the estimator."""
    data_dir = Path(data_dir)
    model_dir = Path(model_dir)
    dataset_csv = data_dir / "dataset.csv"
    if not dataset_csv.exists():
        raise DataValidationError(
            f"{dataset_csv} not found; run `str-studio ingest` first"
        )
    dataset = import_dataset(dataset_csv)
    estimator = load_estimator(model_dir)
    if estimator.base_model.schema_fingerprint != dataset.schema.fingerprint():
        raise SchemaError("model was trained on a different schema than the ingested dataset")

    products = {p.product_id: p for p in load_products(data_dir / "products.csv")}
    sales_by_product: dict[str, list] = {}
    for t in load_sales(data_dir / "sales.csv"):
        sales_by_product.setdefault(t.product_id, []).append(t)
    inventory_by_product: dict[str, list] = {}
    for s in load_inventory(data_dir / "inventory.csv"):
        inventory_by_product.setdefault(s.product_id, []).append(s)
    stores = load_stores(data_dir / "stores.csv")

    log.info("engine state: %d products, %d dataset rows", len(products), len(dataset))
    return EngineState(
        data_dir=data_dir,
        products=products,
        stores=stores,
        sales_by_product=sales_by_product,
        inventory_by_product=inventory_by_product,
        schema=dataset.schema,
        dataset=dataset,
        estimator=estimator,
        season_year=season_year,
    )
