"""Weekly unit flows: received/sold series and 4-week sell-through rate.

Weeks are Monday-aligned absolute indices (days since 0001-01-01 floor-div
7), so offsets across year boundaries stay exact. A product's launch week
(ISO week 1..53) is anchored to an absolute week via its season year.
"""

from __future__ import annotations

import datetime as dt
import logging
from collections import defaultdict
from dataclasses import dataclass

from ..errors import ExcludedProductError
from .types import InventorySnapshot, SalesTransaction

log = logging.getLogger(__name__)


def week_of_date(date: dt.date) -> int:
    """Absolute Monday-aligned week index of a calendar date."""
    return (date.toordinal() - 1) // 7


def launch_week_to_abs(launch_week: int, season_year: int) -> int:
    """Absolute week of the Monday of ISO week `launch_week` in `season_year`."""
    return week_of_date(dt.date.fromisocalendar(season_year, launch_week, 1))


@dataclass
class WeeklyFlow:
    """Aligned weekly series for one product-store (or one product, summed)."""

    start_week: int
    received: list[int]
    sold: list[int]
    inventory: list[int]  # end-of-week on-hand, carried forward over gaps

    @property
    def weeks(self) -> list[int]:
        return list(range(self.start_week, self.start_week + len(self.sold)))


def compute_received(
    snapshots: list[InventorySnapshot], sales: list[SalesTransaction]
) -> WeeklyFlow:
    """Reconstruct weekly units received for one (product, store).

    received(w) = max(0, inv_end(w) - inv_end(w-1) + sold(w)), with
    inventory before the first week defined as 0 and missing snapshot
    weeks carrying forward the last known on-hand value.
    """
    if not snapshots and not sales:
        return WeeklyFlow(start_week=0, received=[], sold=[], inventory=[])

    # End-of-week inventory: latest-dated snapshot within each week.
    inv_by_week: dict[int, tuple[dt.date, int]] = {}
    for s in snapshots:
        w = week_of_date(s.date)
        cur = inv_by_week.get(w)
        if cur is None or s.date >= cur[0]:
            inv_by_week[w] = (s.date, s.units_on_hand)

    sold_by_week: dict[int, int] = defaultdict(int)
    for t in sales:
        sold_by_week[week_of_date(t.date)] += t.units

    weeks = sorted(set(inv_by_week) | set(sold_by_week))
    start, end = weeks[0], weeks[-1]

    received, sold, inventory = [], [], []
    prev_inv = 0
    for w in range(start, end + 1):
        inv = inv_by_week[w][1] if w in inv_by_week else prev_inv
        s = sold_by_week.get(w, 0)
        received.append(max(0, inv - prev_inv + s))
        sold.append(s)
        inventory.append(inv)
        prev_inv = inv
    return WeeklyFlow(start_week=start, received=received, sold=sold, inventory=inventory)


def product_flows(
    product_id: str,
    sales: list[SalesTransaction],
    inventory: list[InventorySnapshot],
) -> dict[str, WeeklyFlow]:
    """Per-store weekly flows for one product."""
    sales_by_store = defaultdict(list)
    for t in sales:
        if t.product_id == product_id:
            sales_by_store[t.store_id].append(t)
    snaps_by_store = defaultdict(list)
    for s in inventory:
        if s.product_id == product_id:
            snaps_by_store[s.store_id].append(s)
    stores = sorted(set(sales_by_store) | set(snaps_by_store))
    return {sid: compute_received(snaps_by_store[sid], sales_by_store[sid]) for sid in stores}


def aggregate_flow(flows: dict[str, WeeklyFlow]) -> WeeklyFlow:
    """Sum per-store flows into one national weekly series."""
    nonempty = [f for f in flows.values() if f.sold]
    if not nonempty:
        return WeeklyFlow(start_week=0, received=[], sold=[], inventory=[])
    start = min(f.start_week for f in nonempty)
    end = max(f.start_week + len(f.sold) - 1 for f in nonempty)
    n = end - start + 1
    received = [0] * n
    sold = [0] * n
    inv = [0] * n
    for f in nonempty:
        for i in range(len(f.sold)):
            k = f.start_week + i - start
            received[k] += f.received[i]
            sold[k] += f.sold[i]
            inv[k] += f.inventory[i]
        # A store's inventory persists at its last value past its series end.
        for k in range(f.start_week + len(f.sold) - start, n):
            inv[k] += f.inventory[-1]
    return WeeklyFlow(start_week=start, received=received, sold=sold, inventory=inv)


def window_totals(flow: WeeklyFlow, launch_abs_week: int, horizon_weeks: int) -> tuple[int, int]:
    """(units sold, units received) within [launch, launch + horizon - 1]."""
    sold = received = 0
    for i, w in enumerate(flow.weeks):
        if launch_abs_week <= w < launch_abs_week + horizon_weeks:
            sold += flow.sold[i]
            received += flow.received[i]
    return sold, received


def infer_launch_week(flow: WeeklyFlow) -> int:
    """First week with any units received."""
    for i, r in enumerate(flow.received):
        if r > 0:
            return flow.start_week + i
    return flow.start_week


def compute_str(
    product_id: str,
    sales: list[SalesTransaction],
    inventory: list[InventorySnapshot],
    horizon_weeks: int = 4,
    launch_week: int | None = None,
    season_year: int | None = None,
) -> float:
    """Sell-through rate over the first `horizon_weeks` weeks, all stores.

    STR = units sold / units received within the window, clamped to [0, 1].
    Raises ExcludedProductError when the window has zero received units, so
    callers can record the exclusion instead of silently emitting 0.
    """
    flow = aggregate_flow(product_flows(product_id, sales, inventory))
    if not flow.sold:
        raise ExcludedProductError(product_id, "no sales or inventory data")
    if launch_week is None:
        launch_abs = infer_launch_week(flow)
    else:
        if season_year is None:
            season_year = _infer_season_year(product_id, sales, inventory)
        launch_abs = launch_week_to_abs(launch_week, season_year)
    sold, received = window_totals(flow, launch_abs, horizon_weeks)
    if received <= 0:
        log.info("excluding %s: zero units received in first %d weeks", product_id, horizon_weeks)
        raise ExcludedProductError(
            product_id, f"zero units received in first {horizon_weeks} weeks"
        )
    return min(1.0, max(0.0, sold / received))


def _infer_season_year(product_id, sales, inventory) -> int:
    """ISO year of the product's earliest recorded event."""
    dates = [t.date for t in sales if t.product_id == product_id]
    dates += [s.date for s in inventory if s.product_id == product_id]
    if not dates:
        raise ExcludedProductError(product_id, "no sales or inventory data")
    return min(dates).isocalendar()[0]
