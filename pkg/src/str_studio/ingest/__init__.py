"""Catalog ingestion: load retail databases, derive STR targets, encode."""

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
from .io import (
    export_dataset,
    import_dataset,
    load_inventory,
    load_products,
    load_sales,
    load_stores,
    load_taxonomy,
    apply_taxonomy,
    save_catalog,
)
from .flows import WeeklyFlow, compute_received, compute_str, week_of_date, launch_week_to_abs
from .encoding import decode_instance, encode, fit_encoder
from .dataset import assemble_dataset, split
from .synthetic import (
    SyntheticConfig,
    SyntheticTruth,
    generate_regression_dataset,
    generate_synthetic_catalog,
    reference_category_sizes,
)

__all__ = [
    "MISSING",
    "is_missing",
    "SalesTransaction",
    "InventorySnapshot",
    "StoreRecord",
    "ProductRecord",
    "FeatureSchema",
    "EncodedInstance",
    "LabeledInstance",
    "Dataset",
    "load_sales",
    "load_inventory",
    "load_products",
    "load_stores",
    "load_taxonomy",
    "apply_taxonomy",
    "save_catalog",
    "export_dataset",
    "import_dataset",
    "WeeklyFlow",
    "compute_received",
    "compute_str",
    "week_of_date",
    "launch_week_to_abs",
    "fit_encoder",
    "encode",
    "decode_instance",
    "assemble_dataset",
    "split",
    "SyntheticConfig",
    "SyntheticTruth",
    "generate_synthetic_catalog",
    "generate_regression_dataset",
    "reference_category_sizes",
]
