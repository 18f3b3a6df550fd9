"""Assemble the weighted STR training dataset and split it."""

from __future__ import annotations

import logging

import numpy as np

from ..errors import DataValidationError, ExcludedProductError
from .encoding import encode
from .flows import aggregate_flow, launch_week_to_abs, product_flows, window_totals
from .types import Dataset, Exclusion, FeatureSchema, LabeledInstance

log = logging.getLogger(__name__)

WEIGHT_FLOOR = 0.01


def assemble_dataset(
    products,
    sales,
    inventory,
    schema: FeatureSchema,
    horizon: int = 4,
    season_year: int | None = None,
) -> Dataset:
    """One labeled row per eligible product.

    target = 4-week STR in [0, 1]; weight = units sold in the window
    normalized by the mean over eligible products, floored at 0.01 so
    zero-sales rows keep a voice. Ineligible products (zero received
    units, no data) land in the dataset's exclusion report.
    """
    sales_by_product = {}
    for t in sales:
        sales_by_product.setdefault(t.product_id, []).append(t)
    inv_by_product = {}
    for s in inventory:
        inv_by_product.setdefault(s.product_id, []).append(s)

    eligible = []
    exclusions = []
    for p in sorted(products, key=lambda p: p.product_id):
        p_sales = sales_by_product.get(p.product_id, [])
        p_inv = inv_by_product.get(p.product_id, [])
        if not p_sales and not p_inv:
            exclusions.append(Exclusion(p.product_id, "no sales or inventory data"))
            continue
        year = season_year
        if year is None:
            dates = [t.date for t in p_sales] + [s.date for s in p_inv]
            year = min(dates).isocalendar()[0]
        launch_abs = launch_week_to_abs(p.launch_week, year)
        flow = aggregate_flow(product_flows(p.product_id, p_sales, p_inv))
        sold, received = window_totals(flow, launch_abs, horizon)
        if received <= 0:
            reason = f"zero units received in first {horizon} weeks"
            log.info("excluding %s: %s", p.product_id, reason)
            exclusions.append(Exclusion(p.product_id, reason))
            continue
        target = min(1.0, max(0.0, sold / received))
        eligible.append((p, target, sold))

    if not eligible:
        raise DataValidationError("no eligible products: every product was excluded")

    mean_sold = float(np.mean([sold for _, _, sold in eligible]))
    rows = []
    for p, target, sold in eligible:
        weight = sold / mean_sold if mean_sold > 0 else 1.0
        rows.append(LabeledInstance(encode(p, schema), target=target, weight=max(WEIGHT_FLOOR, weight)))
    note = f"assembled {len(rows)} rows (horizon={horizon} weeks), {len(exclusions)} excluded"
    return Dataset(schema, rows, note=note, exclusions=exclusions)


def split(dataset: Dataset, fractions, seed: int) -> tuple[Dataset, ...]:
    """Deterministic exact partition of the rows, shuffled by `seed`.

    Part sizes come from rounding the cumulative fractions, so
    (0.6, 0.2, 0.2) on 100 rows gives exactly 60/20/20.
    """
    fractions = list(fractions)
    if any(f <= 0 for f in fractions):
        raise DataValidationError("all split fractions must be positive")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise DataValidationError(f"split fractions must sum to 1, got {sum(fractions)}")
    n = len(dataset)
    bounds = [int(round(sum(fractions[: i + 1]) * n)) for i in range(len(fractions))]
    bounds[-1] = n
    perm = np.random.default_rng(seed).permutation(n)
    parts = []
    names = ["train_base", "train_error", "test"] if len(fractions) == 3 else None
    start = 0
    for i, end in enumerate(bounds):
        if end - start <= 0:
            raise DataValidationError(f"split part {i} is empty (n={n}, fractions={fractions})")
        label = names[i] if names else f"part_{i}"
        parts.append(dataset.subset(sorted(perm[start:end]), note=f"{label} (seed={seed})"))
        start = end
    return tuple(parts)
