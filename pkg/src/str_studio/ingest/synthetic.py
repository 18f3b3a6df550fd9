"""Synthetic retail catalogs with known ground truth.

Two generators:

- `generate_synthetic_catalog` builds a full transactional catalog (the
  four CSV-shaped databases) whose realized 4-week STR per product equals
  a known nonlinear function of its attributes plus optional
  heteroscedastic noise, quantized to 1/units_per_product. The returned
  `SyntheticTruth` exposes that function, the noise level, and the
  generator's own realized sold/received bookkeeping for oracle tests.

- `generate_regression_dataset` skips the transactional layer and emits an
  encoded `Dataset` directly, for model-level tests that need exact
  control over the mean and noise functions.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass, field

import numpy as np

from .types import (
    LAUNCH_WEEK_FEATURE,
    MISSING,
    PRICE_FEATURE,
    Dataset,
    EncodedInstance,
    FeatureSchema,
    FeatureSpec,
    InventorySnapshot,
    LabeledInstance,
    ProductRecord,
    SalesTransaction,
    StoreRecord,
    is_missing,
)

DEFAULT_VOCAB = {
    "pattern": ["solid", "striped", "floral", "graphic", "checks"],
    "fit": ["regular", "slim", "relaxed"],
    "fabric": ["cotton", "polyester", "viscose", "linen", "denim"],
    "neckline": ["round", "v-neck", "strap", "collar", "boat", "button down"],
    "sleeve_length": ["sleeveless", "short sleeve", "half sleeve", "long sleeve"],
    "length": ["crop", "regular", "above knee", "knee", "maxi"],
}
NUMERIC_ATTRS = {
    "color_hue": (0.0, 360.0),
    "color_saturation": (0.0, 1.0),
    "color_value": (0.0, 1.0),
}

#: Spring-Summer 2019 category mix used as the full-scale synthetic profile.
REFERENCE_CATEGORY_SIZES = {
    "shorts": 100,
    "pants": 346,
    "dresses": 445,
    "jeans": 461,
    "shirts": 483,
    "knits": 516,
    "tops": 1031,
    "t-shirts": 1248,
}


def reference_category_sizes() -> dict[str, int]:
    return dict(REFERENCE_CATEGORY_SIZES)


@dataclass
class SyntheticConfig:
    category_sizes: dict[str, int] = field(default_factory=lambda: {"tops": 200})
    n_stores: int = 4
    season_year: int = 2019
    launch_week_min: int = 5
    launch_week_max: int = 40
    units_per_product: int = 100  # multiples of 100 keep zero-noise STR exact
    replenish_fraction: float = 0.25
    carry_weeks: int = 8
    missing_rate: float = 0.02
    noise: str | float = "hetero"  # "zero" | "hetero" | constant sigma
    truth_kind: str = "smooth"  # "smooth" | "step"
    inert_attributes: tuple[str, ...] = ()
    post_window_sale_rate: float = 0.1
    price_min: float = 299.0
    price_max: float = 2999.0
    sigma_lo: float = 0.03
    sigma_hi: float = 0.09


@dataclass
class SyntheticTruth:
    """Ground truth behind a generated catalog.

    `mean(product)` is the noise-free STR (already quantized the way the
    transactional layer realizes it); `std(product)` the noise level.
    `realized` maps product_id -> (sold_in_window, received_in_window,
    target_str) as booked by the generator while emitting transactions.
    """

    config: SyntheticConfig
    category_effect: dict[str, float]
    label_effect: dict[tuple[str, str], float]
    numeric_phase: dict[str, float]
    numeric_slope: dict[str, float]
    price_coef: float
    season_amp: float
    season_phase: float
    realized: dict[str, tuple[int, int, float]] = field(default_factory=dict)

    def __call__(self, product: ProductRecord) -> float:
        return self.mean(product)

    def mean(self, product: ProductRecord) -> float:
        q = self.config.units_per_product
        return round(self._raw_mean(product) * q) / q

    def _raw_mean(self, product: ProductRecord) -> float:
        cfg = self.config
        if cfg.truth_kind == "step":
            sat = product.attributes.get("color_saturation", MISSING)
            val = product.attributes.get("color_value", MISSING)
            hi_sat = (not is_missing(sat)) and sat > 0.5
            hi_val = (not is_missing(val)) and val > 0.5
            return 0.2 + (0.3 if hi_sat else 0.0) + (0.2 if hi_sat and hi_val else 0.0)

        score = 0.45 + self.category_effect.get(product.category, 0.0)
        for name, value in product.attributes.items():
            if name in self.config.inert_attributes or is_missing(value):
                continue
            if isinstance(value, str):
                score += self.label_effect.get((name, value), 0.0)
            elif name == "color_hue":
                score += 0.06 * math.sin(value * 2.0 * math.pi / 360.0 + self.numeric_phase[name])
            elif name in self.numeric_slope:
                score += self.numeric_slope[name] * (value - 0.5)
        score += self.price_coef * (product.list_price - cfg.price_min) / (cfg.price_max - cfg.price_min)
        score += self.season_amp * math.sin(2.0 * math.pi * product.launch_week / 52.0 + self.season_phase)
        return min(0.92, max(0.08, score))

    def std(self, product: ProductRecord) -> float:
        cfg = self.config
        if cfg.noise == "zero":
            return 0.0
        if cfg.noise == "hetero":
            hue = product.attributes.get("color_hue", MISSING)
            return cfg.sigma_hi if (not is_missing(hue)) and hue > 180.0 else cfg.sigma_lo
        return float(cfg.noise)


def _draw_truth(cfg: SyntheticConfig, rng: np.random.Generator) -> SyntheticTruth:
    category_effect = {
        cat: float(rng.uniform(-0.08, 0.08)) for cat in sorted(cfg.category_sizes)
    }
    label_effect = {}
    for attr in sorted(DEFAULT_VOCAB):
        for label in DEFAULT_VOCAB[attr]:
            label_effect[(attr, label)] = float(rng.uniform(-0.07, 0.07))
    numeric_phase = {name: float(rng.uniform(0, 2 * math.pi)) for name in sorted(NUMERIC_ATTRS)}
    numeric_slope = {name: float(rng.uniform(-0.1, 0.1)) for name in ("color_saturation", "color_value")}
    return SyntheticTruth(
        config=cfg,
        category_effect=category_effect,
        label_effect=label_effect,
        numeric_phase=numeric_phase,
        numeric_slope=numeric_slope,
        price_coef=float(rng.uniform(-0.15, -0.08)),
        season_amp=0.08,
        season_phase=float(rng.uniform(0, 2 * math.pi)),
    )


def _apportion(total: int, weights) -> list[int]:
    """Largest-remainder split of `total` into integer parts."""
    weights = np.asarray(weights, dtype=float)
    if total <= 0 or weights.sum() <= 0:
        return [0] * len(weights)
    raw = weights / weights.sum() * total
    parts = np.floor(raw).astype(int)
    short = total - int(parts.sum())
    order = np.argsort(-(raw - parts), kind="stable")
    for i in range(short):
        parts[order[i]] += 1
    return parts.tolist()


def generate_synthetic_catalog(
    config: SyntheticConfig | None = None, seed: int = 0
) -> tuple[
    list[ProductRecord],
    list[SalesTransaction],
    list[InventorySnapshot],
    list[StoreRecord],
    SyntheticTruth,
]:
    """Deterministic synthetic catalog with known STR ground truth.

    Unit flows are conservative by construction: per product-store,
    received - sold = final inventory at every week, sales never exceed
    on-hand stock, and all receipts within the 4-week window sum to
    `units_per_product`.
    """
    cfg = config or SyntheticConfig()
    rng = np.random.default_rng(seed)
    truth = _draw_truth(cfg, rng)

    stores = [
        StoreRecord(
            store_id=f"S{i + 1:02d}",
            address=f"{100 + i} Market Street, City {i + 1}",
            latitude=float(np.round(rng.uniform(8.0, 32.0), 4)),
            longitude=float(np.round(rng.uniform(70.0, 90.0), 4)),
            capacity=int(rng.integers(2000, 9000)),
            selling_area=float(np.round(rng.uniform(150.0, 900.0), 1)),
        )
        for i in range(cfg.n_stores)
    ]
    store_ids = [s.store_id for s in stores]

    products: list[ProductRecord] = []
    serial = 0
    for cat in sorted(cfg.category_sizes):
        for _ in range(cfg.category_sizes[cat]):
            serial += 1
            attrs: dict = {}
            for attr in sorted(DEFAULT_VOCAB):
                attrs[attr] = str(rng.choice(DEFAULT_VOCAB[attr]))
            for attr, (lo, hi) in sorted(NUMERIC_ATTRS.items()):
                attrs[attr] = float(np.round(rng.uniform(lo, hi), 4))
            for attr in list(attrs):
                if rng.random() < cfg.missing_rate:
                    del attrs[attr]
            products.append(
                ProductRecord(
                    product_id=f"P{serial:05d}",
                    category=cat,
                    launch_week=int(rng.integers(cfg.launch_week_min, cfg.launch_week_max + 1)),
                    list_price=float(np.round(rng.uniform(cfg.price_min, cfg.price_max), 2)),
                    attributes=attrs,
                )
            )

    sales: list[SalesTransaction] = []
    inventory: list[InventorySnapshot] = []
    window_profile = np.array([0.40, 0.27, 0.19, 0.14])

    for p in products:
        mu = truth.mean(p)
        sigma = truth.std(p)
        str_target = mu if sigma == 0.0 else min(1.0, max(0.0, mu + sigma * rng.standard_normal()))
        R = cfg.units_per_product
        sold_window = int(round(str_target * R))

        monday = dt.date.fromisocalendar(cfg.season_year, p.launch_week, 1)
        per_store = _apportion(R, [1.0] * cfg.n_stores)
        replenished = rng.random() < cfg.replenish_fraction
        receipts = {}  # (store_idx, week_offset) -> units
        for si, r_total in enumerate(per_store):
            if replenished:
                init = int(round(0.6 * r_total))
                receipts[(si, 0)] = init
                receipts[(si, 2)] = r_total - init
            else:
                receipts[(si, 0)] = r_total

        weekly_sold = _apportion(sold_window, window_profile)
        on_hand = [0] * cfg.n_stores
        carry = max(cfg.carry_weeks, 4)
        leftover = 0
        window_shortfall = 0
        for w in range(carry):
            for si in range(cfg.n_stores):
                on_hand[si] += receipts.get((si, w), 0)
            if w < 4:
                want = weekly_sold[w] + leftover
            else:
                want = int(sum(on_hand) * cfg.post_window_sale_rate)
            sellable = min(want, sum(on_hand))
            leftover = want - sellable if w < 4 else 0
            if w == 3:
                window_shortfall = leftover  # receipts all land by week 2, so 0
            by_store = _apportion(sellable, [max(h, 0) for h in on_hand])
            # Cap at on-hand; push any overflow to the fullest stores.
            overflow = 0
            for si in range(cfg.n_stores):
                if by_store[si] > on_hand[si]:
                    overflow += by_store[si] - on_hand[si]
                    by_store[si] = on_hand[si]
            while overflow > 0:
                si = max(range(cfg.n_stores), key=lambda k: on_hand[k] - by_store[k])
                room = on_hand[si] - by_store[si]
                if room <= 0:
                    break
                take = min(room, overflow)
                by_store[si] += take
                overflow -= take
            for si in range(cfg.n_stores):
                units = by_store[si]
                on_hand[si] -= units
                while units > 0:
                    chunk = int(min(units, rng.integers(1, 4)))
                    units -= chunk
                    sales.append(
                        SalesTransaction(
                            product_id=p.product_id,
                            store_id=store_ids[si],
                            units=chunk,
                            unit_price=p.list_price,
                            date=monday + dt.timedelta(weeks=w, days=int(rng.integers(0, 7))),
                            customer_id=f"C{int(rng.integers(0, 10 ** 6)):06d}",
                        )
                    )
                inventory.append(
                    InventorySnapshot(
                        product_id=p.product_id,
                        store_id=store_ids[si],
                        date=monday + dt.timedelta(weeks=w, days=6),
                        units_on_hand=on_hand[si],
                    )
                )
        realized_sold = sold_window - window_shortfall
        truth.realized[p.product_id] = (realized_sold, R, realized_sold / R)

    sales.sort(key=lambda t: (t.product_id, t.store_id, t.date, t.customer_id or "", t.units, t.unit_price))
    inventory.sort(key=lambda s: (s.product_id, s.store_id, s.date))
    return products, sales, inventory, stores, truth


# ---------------------------------------------------------------------------
# Direct tabular generator for model-level tests


@dataclass
class RegressionTruth:
    """Vectorized mean/std functions behind `generate_regression_dataset`."""

    inert_feature: int
    mean_kind: str = "smooth"

    def mean(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        if self.mean_kind == "step":
            # exactly representable by boosted stumps: noise-recovery tests
            # need the base model to leave residuals that are pure noise
            return 0.2 + 0.3 * (X[:, 0] > 0.5) + 0.2 * (X[:, 1] > 0.3) + 0.1 * (X[:, 2] > 0.7)
        return (
            0.2
            + 0.3 * (X[:, 0] > 0.5)
            + 0.2 * X[:, 1]
            + 0.1 * (X[:, 2] > 0.7)
            + 0.1 * (X[:, 0] > 0.5) * X[:, 3]
        )

    def std(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        return 0.02 + 0.06 * (X[:, 4] > 0.5)


def generate_regression_dataset(
    n: int, seed: int = 0, noise: str = "hetero", d: int = 6, mean_kind: str = "smooth"
) -> tuple[Dataset, RegressionTruth]:
    """Encoded dataset y = mean(X) + std(X) * eps over numeric features.

    Feature d-1 (named fN) never enters the truth, which global-importance
    tests rely on. noise: "hetero" for the step-noise profile, "zero" for
    noise-free targets. mean_kind "step" makes the mean exactly
    tree-representable.
    """
    if d < 6:
        raise ValueError("need at least 6 features")
    rng = np.random.default_rng(seed)
    X = rng.uniform(0.0, 1.0, size=(n, d))
    if mean_kind == "step":
        # grid-valued features: learned thresholds fall between grid points,
        # so held-out rows route exactly like training rows
        X = np.round(X * 20.0) / 20.0
    truth = RegressionTruth(inert_feature=d - 1, mean_kind=mean_kind)
    y = truth.mean(X)
    if noise == "hetero":
        y = y + truth.std(X) * rng.standard_normal(n)
    elif noise != "zero":
        y = y + float(noise) * rng.standard_normal(n)
    schema = FeatureSchema(
        [FeatureSpec(f"f{i}", "numeric", value_range=(0.0, 1.0)) for i in range(d)]
    )
    rows = [
        LabeledInstance(EncodedInstance(X[i]), target=float(y[i]), weight=1.0) for i in range(n)
    ]
    return Dataset(schema, rows, note=f"synthetic regression n={n} seed={seed} noise={noise}"), truth
