"""Numeric encoding of products: categorical labels to codes 1..K.

Matches the encoder that performed best in the source pipeline: each
categorical attribute's labels map to integers 1..K (lexicographic label
order, so the mapping is deterministic), numerics pass through, and
launch_week is appended as the last numeric feature.
"""

from __future__ import annotations

import logging

import numpy as np

from ..errors import SchemaError
from .types import (
    LAUNCH_WEEK_FEATURE,
    MISSING,
    PRICE_FEATURE,
    EncodedInstance,
    FeatureSchema,
    FeatureSpec,
    ProductRecord,
    is_missing,
)

log = logging.getLogger(__name__)


def fit_encoder(products: list[ProductRecord], include_launch_week: bool = True) -> FeatureSchema:
    """Build the feature schema from training products.

    Attribute columns come first (sorted by name), then list_price, then
    launch_week. Attributes with no observed values are dropped with a
    warning. An attribute is numeric only if every observed value is a
    number; otherwise all values are treated as labels.
    """
    if not products:
        raise SchemaError("cannot fit an encoder on zero products")

    names = sorted({name for p in products for name in p.attributes})
    features: list[FeatureSpec] = []
    for name in names:
        observed = [p.attributes[name] for p in products if not is_missing(p.attributes.get(name, MISSING))]
        if not observed:
            log.warning("attribute '%s' has no observed values; dropped from schema", name)
            continue
        if all(isinstance(v, (int, float)) for v in observed):
            lo, hi = float(min(observed)), float(max(observed))
            features.append(FeatureSpec(name, "numeric", value_range=(lo, hi)))
        else:
            labels = sorted({_as_label(v) for v in observed})
            codes = {label: k for k, label in enumerate(labels, start=1)}
            features.append(FeatureSpec(name, "categorical", codes=codes))

    prices = [p.list_price for p in products]
    features.append(FeatureSpec(PRICE_FEATURE, "numeric", value_range=(float(min(prices)), float(max(prices)))))
    if include_launch_week:
        weeks = [p.launch_week for p in products]
        features.append(
            FeatureSpec(LAUNCH_WEEK_FEATURE, "numeric", value_range=(float(min(weeks)), float(max(weeks))))
        )
    return FeatureSchema(features)


def _as_label(value) -> str:
    return value if isinstance(value, str) else repr(float(value))


def encode(product: ProductRecord, schema: FeatureSchema) -> EncodedInstance:
    """Encode a product into a length-d vector; total via MISSING.

    Unseen categorical labels map to MISSING (logged) rather than failing:
    new products legitimately carry novel labels.
    """
    values = np.full(schema.d, MISSING)
    for i, feat in enumerate(schema.features):
        if feat.name == PRICE_FEATURE:
            values[i] = float(product.list_price)
        elif feat.name == LAUNCH_WEEK_FEATURE:
            values[i] = float(product.launch_week)
        else:
            raw = product.attributes.get(feat.name, MISSING)
            if is_missing(raw):
                continue
            if feat.kind == "categorical":
                code = feat.codes.get(_as_label(raw))
                if code is None:
                    log.debug(
                        "product %s: unseen label %r for '%s' mapped to MISSING",
                        product.product_id, raw, feat.name,
                    )
                else:
                    values[i] = float(code)
            else:
                if isinstance(raw, str):
                    log.debug(
                        "product %s: non-numeric value %r for numeric '%s' mapped to MISSING",
                        product.product_id, raw, feat.name,
                    )
                else:
                    values[i] = float(raw)
    return EncodedInstance(values, product_id=product.product_id)


def decode_instance(schema: FeatureSchema, values) -> dict:
    """Inverse of `encode`: slot values back to labels/numbers.

    Returns a dict keyed by feature name; MISSING slots decode to None.
    """
    values = np.asarray(values, dtype=float)
    if len(values) != schema.d:
        raise SchemaError(f"expected {schema.d} values, got {len(values)}")
    out = {}
    for i, feat in enumerate(schema.features):
        v = values[i]
        if np.isnan(v):
            out[feat.name] = None
        elif feat.kind == "categorical":
            out[feat.name] = feat.label_of(int(round(v)))
        else:
            out[feat.name] = float(v)
    return out
