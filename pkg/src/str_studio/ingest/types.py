"""Domain types for the retail databases and the encoded STR dataset."""

from __future__ import annotations

import datetime as dt
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from ..errors import DataValidationError, SchemaError

#: Sentinel for an absent attribute value. NaN so encoded vectors stay numeric.
MISSING = float("nan")

AttrValue = Union[str, float]


def is_missing(value) -> bool:
    """True for None or NaN; labels and finite numbers are present."""
    if value is None:
        return True
    return isinstance(value, float) and math.isnan(value)


@dataclass(frozen=True)
class SalesTransaction:
    """One point-of-sale line: a customer bought `units` of a product."""

    product_id: str
    store_id: str
    units: int
    unit_price: float
    date: dt.date
    customer_id: Optional[str] = None

    def __post_init__(self):
        if self.units < 0:
            raise DataValidationError("units must be >= 0", field="units")
        if self.unit_price < 0:
            raise DataValidationError("unit_price must be >= 0", field="unit_price")


@dataclass(frozen=True)
class InventorySnapshot:
    """End-of-day on-hand units for one (product, store)."""

    product_id: str
    store_id: str
    date: dt.date
    units_on_hand: int

    def __post_init__(self):
        if self.units_on_hand < 0:
            raise DataValidationError("units_on_hand must be >= 0", field="units_on_hand")


@dataclass(frozen=True)
class StoreRecord:
    store_id: str
    address: str
    latitude: float
    longitude: float
    capacity: Optional[int] = None
    selling_area: Optional[float] = None

    def __post_init__(self):
        if not -90.0 <= self.latitude <= 90.0:
            raise DataValidationError("latitude out of [-90, 90]", field="latitude")
        if not -180.0 <= self.longitude <= 180.0:
            raise DataValidationError("longitude out of [-180, 180]", field="longitude")


@dataclass
class ProductRecord:
    """A product's design attributes plus launch timing and price.

    `attributes` maps attribute name to a label, a number, or MISSING.
    """

    product_id: str
    category: str
    launch_week: int
    list_price: float
    attributes: dict[str, AttrValue] = field(default_factory=dict)
    carry_weeks: Optional[int] = None

    def __post_init__(self):
        if not self.category:
            raise DataValidationError("category must be non-empty", field="category")
        if not 1 <= self.launch_week <= 53:
            raise DataValidationError("launch_week out of [1, 53]", field="launch_week")
        if self.list_price < 0:
            raise DataValidationError("list_price must be >= 0", field="list_price")


#: Reserved feature names appended after the attribute columns.
PRICE_FEATURE = "list_price"
LAUNCH_WEEK_FEATURE = "launch_week"


@dataclass(frozen=True)
class FeatureSpec:
    """One encoded feature: either categorical (1..K codes) or numeric."""

    name: str
    kind: str  # "categorical" | "numeric"
    codes: Optional[dict[str, int]] = None  # label -> 1..K, categorical only
    value_range: Optional[tuple[float, float]] = None  # observed, numeric only

    @property
    def n_codes(self) -> int:
        return len(self.codes) if self.codes else 0

    def label_of(self, code: int) -> str:
        for label, c in self.codes.items():
            if c == code:
                return label
        raise SchemaError(f"code {code} not in encoder table for '{self.name}'")


@dataclass
class FeatureSchema:
    """Ordered feature list with encoder tables and numeric ranges."""

    features: list[FeatureSpec]

    @property
    def d(self) -> int:
        return len(self.features)

    @property
    def feature_names(self) -> list[str]:
        return [f.name for f in self.features]

    def index_of(self, name: str) -> int:
        for i, f in enumerate(self.features):
            if f.name == name:
                return i
        raise SchemaError(f"unknown feature '{name}'")

    def to_dict(self) -> dict:
        out = {"features": []}
        for f in self.features:
            entry = {"name": f.name, "kind": f.kind}
            if f.kind == "categorical":
                entry["codes"] = dict(f.codes)
            else:
                entry["range"] = list(f.value_range)
            out["features"].append(entry)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "FeatureSchema":
        feats = []
        for entry in data["features"]:
            if entry["kind"] == "categorical":
                feats.append(
                    FeatureSpec(
                        entry["name"], "categorical", codes={k: int(v) for k, v in entry["codes"].items()}
                    )
                )
            else:
                lo, hi = entry["range"]
                feats.append(FeatureSpec(entry["name"], "numeric", value_range=(float(lo), float(hi))))
        return cls(feats)

    def fingerprint(self) -> str:
        """Stable 16-hex-digit digest of the canonical schema document."""
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class EncodedInstance:
    """A length-d numeric feature vector; NaN marks MISSING slots."""

    values: np.ndarray
    product_id: Optional[str] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)

    def with_value(self, index: int, value: float) -> "EncodedInstance":
        out = self.values.copy()
        out[index] = value
        return EncodedInstance(out, product_id=self.product_id)


@dataclass
class LabeledInstance:
    """An encoded instance with its regression target and instance weight.

    For STR datasets the target lies in [0, 1]; that bound is enforced by
    `assemble_dataset`, not here, because the error model of the
    distribution estimator reuses this container with squared-error targets.
    """

    instance: EncodedInstance
    target: float
    weight: float

    def __post_init__(self):
        if not self.weight > 0:
            raise DataValidationError("weight must be > 0", field="weight")


@dataclass
class Exclusion:
    product_id: str
    reason: str


@dataclass
class Dataset:
    """A feature schema plus labeled rows; caches matrix form for training."""

    schema: FeatureSchema
    rows: list[LabeledInstance]
    note: str = ""
    exclusions: list[Exclusion] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def matrices(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(X, y, w) views of the rows; X uses NaN for MISSING."""
        if not hasattr(self, "_matrices"):
            X = np.empty((len(self.rows), self.schema.d), dtype=float)
            y = np.empty(len(self.rows), dtype=float)
            w = np.empty(len(self.rows), dtype=float)
            for i, row in enumerate(self.rows):
                X[i] = row.instance.values
                y[i] = row.target
                w[i] = row.weight
            self._matrices = (X, y, w)
        return self._matrices

    def subset(self, indices, note: str = "") -> "Dataset":
        return Dataset(self.schema, [self.rows[i] for i in indices], note=note or self.note)
