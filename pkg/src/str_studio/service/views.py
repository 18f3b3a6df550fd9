"""Catalog views assembled from engine state: product pages, summaries,
filtered listings, and raw-attribute encoding for forecast requests."""

from __future__ import annotations

from collections import defaultdict
from typing import Optional

import numpy as np

from ..errors import DataValidationError, SchemaError
from ..explain import shap_values
from ..ingest.encoding import encode
from ..ingest.types import LAUNCH_WEEK_FEATURE, PRICE_FEATURE, EncodedInstance, ProductRecord
from ..ingest.flows import week_of_date
from ..uncertainty import predict_distribution, prediction_interval
from .state import EngineState

HISTOGRAM_BINS = np.linspace(0.0, 1.0, 11)  # fixed 0-1 bins, step 0.1


def encode_request_attributes(
    state: EngineState, attributes: dict, launch_week: int, list_price: float
) -> EncodedInstance:
    """Server-side encoding of raw attribute labels; the UI never sees codes.

    Unknown attribute names are a client error (400 upstream).
    """
    known = set(state.schema.feature_names)
    for name in attributes:
        if name not in known or name in (PRICE_FEATURE, LAUNCH_WEEK_FEATURE):
            raise DataValidationError(f"unknown attribute '{name}'", field=f"attributes.{name}")
    product = ProductRecord(
        product_id="(request)",
        category="(request)",
        launch_week=launch_week,
        list_price=list_price,
        attributes={k: v for k, v in attributes.items() if v is not None},
    )
    return encode(product, state.schema)


def forecast_payload(state: EngineState, instance: EncodedInstance) -> dict:
    dist = predict_distribution(state.estimator, instance)
    lo, hi = prediction_interval(state.estimator, instance, 0.9)
    attribution = shap_values(state.base_model, instance)
    contributions = [
        {"feature": name, "value": _present(instance.values[i]), "phi": float(attribution.contributions[i])}
        for i, name in enumerate(state.schema.feature_names)
    ]
    return {
        "mean": dist.mean,
        "std_dev": dist.std_dev,
        "interval": {"coverage": 0.9, "lo": lo, "hi": hi},
        "attribution": {
            "base_value": attribution.base_value,
            "predicted": attribution.predicted,
            "contributions": contributions,
        },
    }


def _present(v) -> Optional[float]:
    return None if np.isnan(v) else float(v)


def product_summary_row(state: EngineState, product: ProductRecord) -> dict:
    return {
        "product_id": product.product_id,
        "category": product.category,
        "launch_week": product.launch_week,
        "list_price": product.list_price,
        "attributes": dict(sorted(product.attributes.items())),
        "str": state.str_by_product().get(product.product_id),
    }


def product_view(state: EngineState, product_id: str) -> dict:
    """Full product page: record, weekly series, STR, forecast, attribution."""
    product = state.products.get(product_id)
    if product is None:
        raise KeyError(product_id)
    flow = state.flow(product_id)
    launch_abs = state.launch_abs_week(product)
    weeks_rel = [w - launch_abs for w in flow.weeks]
    prices = _weekly_prices(state, product, flow.weeks)
    instance = encode(product, state.schema)
    payload = forecast_payload(state, instance)
    return {
        **product_summary_row(state, product),
        "series": {
            "week_offset": weeks_rel,
            "sold": flow.sold,
            "received": flow.received,
            "stock": flow.inventory,
            "price": prices,
        },
        "forecast": {"mean": payload["mean"], "interval": payload["interval"]},
        "attribution": payload["attribution"],
    }


def _weekly_prices(state: EngineState, product: ProductRecord, weeks: list[int]) -> list[float]:
    by_week: dict[int, list[float]] = defaultdict(list)
    for t in state.sales_by_product.get(product.product_id, []):
        by_week[week_of_date(t.date)].append(t.unit_price)
    return [
        float(np.mean(by_week[w])) if by_week.get(w) else product.list_price for w in weeks
    ]


def filter_products(
    state: EngineState,
    category: Optional[str] = None,
    attrs: Optional[dict] = None,
    str_min: Optional[float] = None,
    str_max: Optional[float] = None,
    q: Optional[str] = None,
) -> list[ProductRecord]:
    strs = state.str_by_product()
    out = []
    for pid in sorted(state.products):
        p = state.products[pid]
        if category is not None and p.category != category:
            continue
        if attrs:
            if any(str(p.attributes.get(name)) != str(value) for name, value in attrs.items()):
                continue
        s = strs.get(pid)
        if str_min is not None and (s is None or s < str_min):
            continue
        if str_max is not None and (s is None or s > str_max):
            continue
        if q:
            hay = " ".join([p.product_id, p.category] + [str(v) for v in p.attributes.values()]).lower()
            if q.lower() not in hay:
                continue
        out.append(p)
    return out


def sort_products(state: EngineState, products: list[ProductRecord], sort: str) -> list[ProductRecord]:
    strs = state.str_by_product()
    if sort == "id":
        return sorted(products, key=lambda p: p.product_id)
    if sort == "str_desc":
        return sorted(products, key=lambda p: (-(strs.get(p.product_id) if strs.get(p.product_id) is not None else -1), p.product_id))
    if sort == "str_asc":
        return sorted(products, key=lambda p: (strs.get(p.product_id) if strs.get(p.product_id) is not None else 2, p.product_id))
    if sort == "price_asc":
        return sorted(products, key=lambda p: (p.list_price, p.product_id))
    if sort == "price_desc":
        return sorted(products, key=lambda p: (-p.list_price, p.product_id))
    raise SchemaError(f"unknown sort '{sort}'")


def catalog_summary(state: EngineState, group_by: str = "category") -> list[dict]:
    """Per-group STR histogram, mean/median, and best/worst sellers."""
    strs = state.str_by_product()
    groups: dict[str, list[str]] = defaultdict(list)
    for pid in sorted(state.products):
        p = state.products[pid]
        if group_by == "category":
            key = p.category
        elif group_by.startswith("attr:"):
            raw = p.attributes.get(group_by[5:])
            key = str(raw) if raw is not None else "(missing)"
        else:
            raise SchemaError(f"unknown group_by '{group_by}'")
        groups[key].append(pid)

    out = []
    for key in sorted(groups):
        pids = groups[key]
        scored = [(pid, strs[pid]) for pid in pids if pid in strs]
        values = np.array([s for _, s in scored]) if scored else np.array([])
        hist, _ = np.histogram(values, bins=HISTOGRAM_BINS) if values.size else (np.zeros(10, dtype=int), None)
        ranked = sorted(scored, key=lambda t: (-t[1], t[0]))
        out.append(
            {
                "group": key,
                "count": len(pids),
                "scored_count": len(scored),
                "histogram": {
                    "bin_edges": [round(b, 1) for b in HISTOGRAM_BINS.tolist()],
                    "counts": hist.tolist(),
                },
                "mean_str": float(values.mean()) if values.size else None,
                "median_str": float(np.median(values)) if values.size else None,
                "best": [{"product_id": pid, "str": s} for pid, s in ranked[:10]],
                "worst": [{"product_id": pid, "str": s} for pid, s in ranked[-10:][::-1]],
            }
        )
    return out
