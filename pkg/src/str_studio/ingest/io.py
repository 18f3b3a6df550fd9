"""CSV loading/saving for the four retail databases and dataset export.

All files are UTF-8 CSV with a header row. Attribute columns in
products.csv are prefixed ``attr:``; an empty cell means MISSING. Loaders
return rows sorted by primary key so repeated loads (and save/load
round-trips) are byte-stable.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
import logging
import math
from pathlib import Path
from typing import Iterable

import numpy as np

from ..errors import DataValidationError, SchemaError
from .types import (
    MISSING,
    Dataset,
    EncodedInstance,
    FeatureSchema,
    InventorySnapshot,
    LabeledInstance,
    ProductRecord,
    SalesTransaction,
    StoreRecord,
    is_missing,
)

log = logging.getLogger(__name__)

SALES_COLUMNS = ["customer_id", "product_id", "store_id", "units", "unit_price", "date"]
INVENTORY_COLUMNS = ["product_id", "store_id", "date", "units_on_hand"]
STORE_COLUMNS = ["store_id", "address", "lat", "lon", "capacity", "selling_area"]
PRODUCT_FIXED_COLUMNS = ["product_id", "category", "launch_week", "list_price"]
ATTR_PREFIX = "attr:"


def _open_reader(path):
    path = Path(path)
    if not path.exists():
        raise DataValidationError(f"file not found: {path}")
    return path.open(newline="", encoding="utf-8")


def _check_header(header, required, path):
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing required column(s) {missing}")


def _parse_date(text, row):
    try:
        return dt.date.fromisoformat(text)
    except ValueError as exc:
        raise DataValidationError(f"bad date '{text}'", row=row, field="date") from exc


def _parse_int(text, row, field):
    try:
        return int(text)
    except ValueError as exc:
        raise DataValidationError(f"bad integer '{text}'", row=row, field=field) from exc


def _parse_float(text, row, field):
    try:
        return float(text)
    except ValueError as exc:
        raise DataValidationError(f"bad number '{text}'", row=row, field=field) from exc


def load_sales(path) -> list[SalesTransaction]:
    """Load sales transactions; rejects negative units with the row number."""
    out = []
    with _open_reader(path) as fh:
        reader = csv.DictReader(fh)
        _check_header(reader.fieldnames or [], SALES_COLUMNS, path)
        for i, rec in enumerate(reader, start=2):
            units = _parse_int(rec["units"], i, "units")
            if units < 0:
                raise DataValidationError("units must be >= 0", row=i, field="units")
            try:
                out.append(
                    SalesTransaction(
                        product_id=rec["product_id"],
                        store_id=rec["store_id"],
                        units=units,
                        unit_price=_parse_float(rec["unit_price"], i, "unit_price"),
                        date=_parse_date(rec["date"], i),
                        customer_id=rec["customer_id"] or None,
                    )
                )
            except DataValidationError as exc:
                if exc.row is None:
                    raise DataValidationError(str(exc), row=i) from exc
                raise
    out.sort(key=_sales_key)
    return out


def load_inventory(path) -> list[InventorySnapshot]:
    """Load inventory snapshots; duplicate (product, store, date) is an error."""
    out = []
    seen = set()
    with _open_reader(path) as fh:
        reader = csv.DictReader(fh)
        _check_header(reader.fieldnames or [], INVENTORY_COLUMNS, path)
        for i, rec in enumerate(reader, start=2):
            snap = InventorySnapshot(
                product_id=rec["product_id"],
                store_id=rec["store_id"],
                date=_parse_date(rec["date"], i),
                units_on_hand=_parse_int(rec["units_on_hand"], i, "units_on_hand"),
            )
            key = (snap.product_id, snap.store_id, snap.date)
            if key in seen:
                raise DataValidationError(
                    f"duplicate snapshot for (product={key[0]}, store={key[1]}, date={key[2]})", row=i
                )
            seen.add(key)
            out.append(snap)
    out.sort(key=lambda s: (s.product_id, s.store_id, s.date))
    return out


def load_stores(path) -> list[StoreRecord]:
    out = []
    with _open_reader(path) as fh:
        reader = csv.DictReader(fh)
        _check_header(reader.fieldnames or [], STORE_COLUMNS, path)
        for i, rec in enumerate(reader, start=2):
            out.append(
                StoreRecord(
                    store_id=rec["store_id"],
                    address=rec["address"],
                    latitude=_parse_float(rec["lat"], i, "lat"),
                    longitude=_parse_float(rec["lon"], i, "lon"),
                    capacity=_parse_int(rec["capacity"], i, "capacity") if rec["capacity"] else None,
                    selling_area=_parse_float(rec["selling_area"], i, "selling_area")
                    if rec["selling_area"]
                    else None,
                )
            )
    out.sort(key=lambda s: s.store_id)
    return out


def _parse_attr_cell(text):
    """Empty cell -> MISSING; numeric text -> float; otherwise a label."""
    if text == "":
        return MISSING
    try:
        return float(text)
    except ValueError:
        return text


def load_products(path) -> list[ProductRecord]:
    out = []
    with _open_reader(path) as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        _check_header(header, PRODUCT_FIXED_COLUMNS, path)
        attr_cols = [c for c in header if c.startswith(ATTR_PREFIX)]
        for i, rec in enumerate(reader, start=2):
            if not rec["category"]:
                raise DataValidationError("category must be non-empty", row=i, field="category")
            attrs = {}
            for col in attr_cols:
                value = _parse_attr_cell(rec[col])
                if not is_missing(value):
                    attrs[col[len(ATTR_PREFIX):]] = value
            try:
                out.append(
                    ProductRecord(
                        product_id=rec["product_id"],
                        category=rec["category"],
                        launch_week=_parse_int(rec["launch_week"], i, "launch_week"),
                        list_price=_parse_float(rec["list_price"], i, "list_price"),
                        attributes=attrs,
                    )
                )
            except DataValidationError as exc:
                if exc.row is None:
                    raise DataValidationError(str(exc), row=i, field=exc.field) from exc
                raise
    out.sort(key=lambda p: p.product_id)
    return out


def load_taxonomy(path) -> list[tuple[str, str, str]]:
    """Rename table rows (attribute, from_label, to_label)."""
    out = []
    with _open_reader(path) as fh:
        reader = csv.DictReader(fh)
        _check_header(reader.fieldnames or [], ["attribute", "from_label", "to_label"], path)
        for rec in reader:
            out.append((rec["attribute"], rec["from_label"], rec["to_label"]))
    return out


def apply_taxonomy(products: list[ProductRecord], table) -> list[ProductRecord]:
    """Rename/merge attribute labels in place of fuzzy standardization."""
    mapping = {(attr, src): dst for attr, src, dst in table}
    out = []
    for p in products:
        attrs = dict(p.attributes)
        for name, value in list(attrs.items()):
            if isinstance(value, str) and (name, value) in mapping:
                attrs[name] = mapping[(name, value)]
        out.append(
            ProductRecord(
                product_id=p.product_id,
                category=p.category,
                launch_week=p.launch_week,
                list_price=p.list_price,
                attributes=attrs,
                carry_weeks=p.carry_weeks,
            )
        )
    return out


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _sales_key(t: SalesTransaction):
    return (t.product_id, t.store_id, t.date, t.customer_id or "", t.units, t.unit_price)


def save_catalog(out_dir, products, sales, inventory, stores) -> dict[str, Path]:
    """Write the four CSV files; rows sorted by primary key for stability."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}

    paths["sales"] = out_dir / "sales.csv"
    with paths["sales"].open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(SALES_COLUMNS)
        for t in sorted(sales, key=_sales_key):
            w.writerow([t.customer_id or "", t.product_id, t.store_id, t.units, _fmt(t.unit_price), t.date.isoformat()])

    paths["inventory"] = out_dir / "inventory.csv"
    with paths["inventory"].open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(INVENTORY_COLUMNS)
        for s in sorted(inventory, key=lambda s: (s.product_id, s.store_id, s.date)):
            w.writerow([s.product_id, s.store_id, s.date.isoformat(), s.units_on_hand])

    attr_names = sorted({name for p in products for name in p.attributes})
    paths["products"] = out_dir / "products.csv"
    with paths["products"].open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(PRODUCT_FIXED_COLUMNS + [ATTR_PREFIX + a for a in attr_names])
        for p in sorted(products, key=lambda p: p.product_id):
            row = [p.product_id, p.category, p.launch_week, _fmt(p.list_price)]
            for a in attr_names:
                value = p.attributes.get(a, MISSING)
                row.append("" if is_missing(value) else _fmt(value))
            w.writerow(row)

    paths["stores"] = out_dir / "stores.csv"
    with paths["stores"].open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(STORE_COLUMNS)
        for s in sorted(stores, key=lambda s: s.store_id):
            w.writerow(
                [
                    s.store_id,
                    s.address,
                    _fmt(s.latitude),
                    _fmt(s.longitude),
                    "" if s.capacity is None else s.capacity,
                    "" if s.selling_area is None else _fmt(s.selling_area),
                ]
            )
    return paths


def export_dataset(dataset: Dataset, csv_path, schema_path=None) -> None:
    """Write encoded rows as CSV plus a JSON sidecar with the schema."""
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    if schema_path is None:
        schema_path = csv_path.with_suffix(".schema.json")
    names = dataset.schema.feature_names
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["product_id"] + names + ["target", "weight"])
        for row in dataset.rows:
            cells = [row.instance.product_id or ""]
            for v in row.instance.values:
                cells.append("" if math.isnan(v) else repr(float(v)))
            cells.append(repr(float(row.target)))
            cells.append(repr(float(row.weight)))
            w.writerow(cells)
    sidecar = {"schema": dataset.schema.to_dict(), "note": dataset.note, "n_rows": len(dataset)}
    if dataset.exclusions:
        sidecar["exclusions"] = [{"product_id": e.product_id, "reason": e.reason} for e in dataset.exclusions]
    Path(schema_path).write_text(json.dumps(sidecar, indent=2) + "\n", encoding="utf-8")


def import_dataset(csv_path, schema_path=None) -> Dataset:
    csv_path = Path(csv_path)
    if schema_path is None:
        schema_path = csv_path.with_suffix(".schema.json")
    sidecar = json.loads(Path(schema_path).read_text(encoding="utf-8"))
    schema = FeatureSchema.from_dict(sidecar["schema"])
    rows = []
    with _open_reader(csv_path) as fh:
        reader = csv.DictReader(fh)
        _check_header(reader.fieldnames or [], schema.feature_names + ["target", "weight"], csv_path)
        for i, rec in enumerate(reader, start=2):
            values = np.array(
                [float(rec[name]) if rec[name] != "" else MISSING for name in schema.feature_names]
            )
            rows.append(
                LabeledInstance(
                    instance=EncodedInstance(values, product_id=rec.get("product_id") or None),
                    target=_parse_float(rec["target"], i, "target"),
                    weight=_parse_float(rec["weight"], i, "weight"),
                )
            )
    return Dataset(schema, rows, note=sidecar.get("note", ""))
