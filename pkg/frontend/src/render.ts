/** Pure HTML renderers: same inputs, same markup, no model math.
 *
 * Every function maps API payloads (or nulls, while loading/offline) to a
 * string; controllers assign the strings to containers. Numeric slots
 * render an em-dash placeholder until the API has spoken.
 */

import type {
    Attribution,
    CounterfactualResponse,
    DesignDraft,
    FeatureDef,
    ForecastResponse,
    ProductListResponse,
    ProductView,
    SummaryGroup,
    SweepPoint,
} from "./types.js";
import type { DesignerState } from "./state.js";
import { widgetFeatures } from "./state.js";

export const BLANK = "—";

export function esc(text: unknown): string {
    return String(text)
        .replace(/&/g, "&amp;")
        .replace(/</g, "&lt;")
        .replace(/>/g, "&gt;")
        .replace(/"/g, "&quot;");
}

export function pct(value: number | null | undefined): string {
    return value === null || value === undefined ? BLANK : `${(100 * value).toFixed(2)}%`;
}

export function sig4(value: number): string {
    if (value === 0) return "0";
    const digits = Math.max(0, 3 - Math.floor(Math.log10(Math.abs(value))));
    const rounded = Number(value.toFixed(digits));
    return String(rounded);
}

export function displayValue(value: string | number | null): string {
    if (value === null || value === undefined) return "missing";
    return typeof value === "number" ? sig4(value) : value;
}

// ---------------------------------------------------------------- widgets

export function renderWidgets(state: DesignerState): string {
    const rows: string[] = [];
    for (const f of widgetFeatures(state)) {
        if (f.kind === "categorical") {
            const options = (f.labels ?? [])
                .map((label) => {
                    const selected = state.values[f.name] === label ? " selected" : "";
                    return `<option value="${esc(label)}"${selected}>${esc(label)}</option>`;
                })
                .join("");
            rows.push(
                `<label class="widget" data-feature="${esc(f.name)}">${esc(f.name)}` +
                    `<select data-widget="${esc(f.name)}">${options}</select></label>`,
            );
        } else {
            const [lo, hi] = f.range ?? [0, 1];
            const value = Number(state.values[f.name] ?? lo);
            rows.push(
                `<label class="widget" data-feature="${esc(f.name)}">${esc(f.name)}` +
                    `<input type="range" data-widget="${esc(f.name)}" min="${lo}" max="${hi}"` +
                    ` step="${(hi - lo) / 100 || 1}" value="${value}">` +
                    `<span class="widget-value">${sig4(value)}</span></label>`,
            );
        }
    }
    const price = state.listPrice;
    const week = state.launchWeek;
    rows.push(
        `<label class="widget" data-feature="list_price">list_price` +
            `<input type="number" data-widget="list_price" value="${price}"></label>`,
    );
    rows.push(
        `<label class="widget" data-feature="launch_week">launch_week` +
            `<input type="range" data-widget="launch_week" min="1" max="53" step="1" value="${week}">` +
            `<span class="widget-value">${week}</span></label>`,
    );
    return `<div class="widgets">${rows.join("")}</div>`;
}

// ---------------------------------------------------------------- forecast

export function renderForecastCard(forecast: ForecastResponse | null): string {
    if (!forecast) {
        return `<div class="forecast-card"><span class="mean">${BLANK}</span>` +
            `<span class="interval">${BLANK}</span></div>`;
    }
    const { mean, interval } = forecast;
    return (
        `<div class="forecast-card"><span class="mean">${pct(mean)}</span>` +
        `<span class="interval">${Math.round(interval.coverage * 100)}% interval: ` +
        `${pct(interval.lo)} to ${pct(interval.hi)}</span></div>`
    );
}

/** SHAP waterfall rows, largest |phi| first (the Fig. 4/7 ordering). */
export function renderWaterfall(attribution: Attribution | null): string {
    if (!attribution) {
        return `<div class="waterfall empty">${BLANK}</div>`;
    }
    const ordered = [...attribution.contributions].sort(
        (a, b) => Math.abs(b.phi) - Math.abs(a.phi) || a.feature.localeCompare(b.feature),
    );
    const maxAbs = Math.max(...ordered.map((c) => Math.abs(c.phi)), 1e-12);
    const rows = ordered.map((c) => {
        const width = Math.round((1000 * Math.abs(c.phi)) / maxAbs) / 10;
        const side = c.phi < 0 ? "neg" : "pos";
        const value = c.value === null ? "missing" : sig4(c.value);
        return (
            `<div class="bar-row" data-feature="${esc(c.feature)}">` +
            `<span class="bar-label">${esc(c.feature)} = ${esc(value)}</span>` +
            `<span class="bar ${side}" style="width:${width}%"></span>` +
            `<span class="bar-phi">${c.phi >= 0 ? "+" : ""}${c.phi.toFixed(4)}</span></div>`
        );
    });
    return (
        `<div class="waterfall"><div class="waterfall-base">average ${pct(attribution.base_value)}` +
        ` → this design ${pct(attribution.predicted)}</div>${rows.join("")}</div>`
    );
}

// ---------------------------------------------------------------- what-if

export function renderSweepChart(feature: string, points: SweepPoint[] | null): string {
    if (!points || points.length === 0) {
        return `<div class="sweep empty">${BLANK}</div>`;
    }
    const w = 420;
    const h = 160;
    const pad = 28;
    const preds = points.flatMap((p) => [p.lo ?? p.prediction, p.hi ?? p.prediction, p.prediction]);
    const lo = Math.min(...preds);
    const hi = Math.max(...preds);
    const ySpan = hi - lo || 1;
    const x = (i: number) => pad + (i * (w - 2 * pad)) / Math.max(points.length - 1, 1);
    const y = (v: number) => h - pad - ((v - lo) * (h - 2 * pad)) / ySpan;
    const marks = points
        .map((p, i) => {
            const whisker =
                p.lo !== undefined && p.hi !== undefined
                    ? `<line x1="${x(i)}" y1="${y(p.lo)}" x2="${x(i)}" y2="${y(p.hi)}" class="whisker"/>`
                    : "";
            const cls = p.is_original ? "pt original" : "pt";
            return (
                whisker +
                `<circle cx="${x(i)}" cy="${y(p.prediction)}" r="4" class="${cls}">` +
                `<title>${esc(p.label ?? p.value)}: ${pct(p.prediction)}</title></circle>`
            );
        })
        .join("");
    const line = points.map((p, i) => `${x(i)},${y(p.prediction)}`).join(" ");
    const labels = points
        .map((p, i) => `<text x="${x(i)}" y="${h - 8}" class="tick">${esc(p.label ?? sig4(p.value))}</text>`)
        .join("");
    return (
        `<svg class="sweep" viewBox="0 0 ${w} ${h}" data-feature="${esc(feature)}">` +
        `<polyline points="${line}" class="sweep-line"/>${marks}${labels}</svg>`
    );
}

// ---------------------------------------------------------- counterfactual

/** The Tables 1-3 layout: feature, from -> to, then forecast before/after. */
export function renderDiffTable(result: CounterfactualResponse | null): string {
    if (!result) {
        return `<table class="diff-table empty"><tbody><tr><td>${BLANK}</td></tr></tbody></table>`;
    }
    const head =
        "<thead><tr><th>Product features</th><th>Feature inputs</th><th></th>" +
        "<th>Counterfactual explanation</th></tr></thead>";
    const rows = result.diffs
        .map(
            (d) =>
                `<tr class="diff-row" data-feature="${esc(d.feature)}"><td>${esc(d.feature)}</td>` +
                `<td>${esc(displayValue(d.from))}</td><td>→</td>` +
                `<td>${esc(displayValue(d.to))}</td></tr>`,
        )
        .join("");
    const footer =
        `<tr class="diff-forecast"><td><strong>STR forecast:</strong></td>` +
        `<td>${pct(result.original_predicted)}</td><td></td><td>${pct(result.predicted)}</td></tr>`;
    const feasibility = result.feasible
        ? ""
        : `<caption class="infeasible">target ${pct(result.target)} not reachable; closest shown</caption>`;
    return `<table class="diff-table">${feasibility}${head}<tbody>${rows}${footer}</tbody></table>`;
}

export function renderFrozenToggles(features: FeatureDef[], frozen: Set<string>): string {
    const boxes = features
        .filter((f) => f.name !== "launch_week")
        .map((f) => {
            const checked = frozen.has(f.name) ? " checked" : "";
            return (
                `<label class="freeze"><input type="checkbox" data-freeze="${esc(f.name)}"${checked}>` +
                `${esc(f.name)}</label>`
            );
        })
        .join("");
    return `<div class="frozen-toggles">${boxes}</div>`;
}

// ---------------------------------------------------------------- buyer

export function renderHistogram(group: SummaryGroup): string {
    const maxCount = Math.max(...group.histogram.counts, 1);
    const bars = group.histogram.counts
        .map((count, i) => {
            const h = Math.round((100 * count) / maxCount);
            const edge = group.histogram.bin_edges[i] ?? i / 10;
            return (
                `<div class="hist-bar" data-bin="${edge}" style="height:${h}%">` +
                `<title>${edge}: ${count}</title></div>`
            );
        })
        .join("");
    return (
        `<div class="histogram" data-group="${esc(group.group)}">` +
        `<div class="hist-title">${esc(group.group)} (${group.count}) ` +
        `mean ${pct(group.mean_str)} median ${pct(group.median_str)}</div>` +
        `<div class="hist-bars">${bars}</div></div>`
    );
}

export function renderSellerList(title: string, rows: { product_id: string; str: number }[]): string {
    const items = rows
        .map(
            (r) =>
                `<li><a href="#" data-product="${esc(r.product_id)}">${esc(r.product_id)}</a>` +
                ` <span class="str">${pct(r.str)}</span></li>`,
        )
        .join("");
    return `<div class="sellers"><h4>${esc(title)}</h4><ol>${items}</ol></div>`;
}

export function renderProductTable(list: ProductListResponse | null): string {
    if (!list) {
        return `<div class="product-table empty">${BLANK}</div>`;
    }
    if (list.items.length === 0) {
        return `<div class="product-table empty">no products match the current filters</div>`;
    }
    const rows = list.items
        .map(
            (p) =>
                `<tr data-product="${esc(p.product_id)}"><td><a href="#" data-product="${esc(p.product_id)}">` +
                `${esc(p.product_id)}</a></td><td>${esc(p.category)}</td>` +
                `<td>${p.launch_week}</td><td>${sig4(p.list_price)}</td><td>${pct(p.str)}</td></tr>`,
        )
        .join("");
    return (
        `<table class="product-table"><thead><tr><th>product</th><th>category</th>` +
        `<th>week</th><th>price</th><th>4-week STR</th></tr></thead><tbody>${rows}</tbody>` +
        `</table><div class="paging">${list.items.length} of ${list.total}</div>`
    );
}

export function renderSeriesChart(view: ProductView): string {
    const { week_offset, sold, stock } = view.series;
    const w = 420;
    const h = 140;
    const pad = 24;
    const maxY = Math.max(...sold, ...stock, 1);
    const x = (i: number) => pad + (i * (w - 2 * pad)) / Math.max(week_offset.length - 1, 1);
    const y = (v: number) => h - pad - (v * (h - 2 * pad)) / maxY;
    const line = (vals: number[], cls: string) =>
        `<polyline class="${cls}" points="${vals.map((v, i) => `${x(i)},${y(v)}`).join(" ")}"/>`;
    return (
        `<svg class="series" viewBox="0 0 ${w} ${h}">` +
        line(sold, "series-sold") +
        line(stock, "series-stock") +
        `</svg>`
    );
}

export function renderProductView(view: ProductView | null): string {
    if (!view) {
        return `<div class="product-view empty">${BLANK}</div>`;
    }
    const attrs = Object.entries(view.attributes)
        .map(([k, v]) => `<li>${esc(k)}: ${esc(v ?? "missing")}</li>`)
        .join("");
    return (
        `<div class="product-view" data-product="${esc(view.product_id)}">` +
        `<h3>${esc(view.product_id)} <small>${esc(view.category)}</small></h3>` +
        `<div class="kpis"><span class="kpi">4-week STR ${pct(view.str)}</span>` +
        `<span class="kpi">forecast ${pct(view.forecast.mean)} ` +
        `(${pct(view.forecast.interval.lo)} to ${pct(view.forecast.interval.hi)})</span></div>` +
        `<ul class="attrs">${attrs}</ul>` +
        renderSeriesChart(view) +
        renderWaterfall(view.attribution) +
        `</div>`
    );
}

// ---------------------------------------------------------------- designs

export function renderDraftCard(draft: DesignDraft): string {
    const feedback = draft.feedback
        .map((f) => `<li><strong>${esc(f.author)}</strong>: ${esc(f.text)}</li>`)
        .join("");
    return (
        `<div class="draft" data-draft="${esc(draft.draft_id)}">` +
        `<h4>${esc(draft.draft_id)} <span class="status">${esc(draft.status)}</span></h4>` +
        `<button data-like="${esc(draft.draft_id)}">❤ ${draft.likes}</button>` +
        `<ul class="feedback">${feedback}</ul></div>`
    );
}
