/** Widget state and the request bodies it commits.
 *
 * The builders here are the single source of every outgoing body, so the
 * golden-request tests pin exactly what each widget commit sends. The UI
 * performs no model math: all displayed numbers come back from the API.
 */

import type {
    AttrValue,
    CounterfactualBody,
    FeatureDef,
    ForecastBody,
    SchemaResponse,
    WhatIfBody,
} from "./types.js";

export const FORECAST_DEBOUNCE_MS = 300;

const SPECIAL = new Set(["list_price", "launch_week"]);

export interface DesignerState {
    features: FeatureDef[];
    values: Record<string, AttrValue>;
    launchWeek: number;
    listPrice: number;
    targetStr: number;
    epsilon: number;
    frozen: Set<string>;
    cfSeed: number;
}

export function initDesignerState(schema: SchemaResponse): DesignerState {
    const values: Record<string, AttrValue> = {};
    let launchWeek = 1;
    let listPrice = 0;
    for (const f of schema.features) {
        if (f.name === "launch_week") {
            launchWeek = Math.round(midpoint(f));
        } else if (f.name === "list_price") {
            listPrice = midpoint(f);
        } else if (f.kind === "categorical") {
            values[f.name] = f.labels?.[0] ?? null;
        } else {
            values[f.name] = midpoint(f);
        }
    }
    return {
        features: schema.features,
        values,
        launchWeek,
        listPrice,
        targetStr: 0.6,
        epsilon: 0.02,
        frozen: new Set(),
        cfSeed: 0,
    };
}

function midpoint(f: FeatureDef): number {
    const [lo, hi] = f.range ?? [0, 1];
    return (lo + hi) / 2;
}

export function widgetFeatures(state: DesignerState): FeatureDef[] {
    return state.features.filter((f) => !SPECIAL.has(f.name));
}

/** One widget commit; returns true when the value actually changed. */
export function commitWidget(state: DesignerState, name: string, value: AttrValue): boolean {
    if (name === "launch_week") {
        const week = Math.round(Number(value));
        if (week === state.launchWeek) return false;
        state.launchWeek = week;
        return true;
    }
    if (name === "list_price") {
        const price = Number(value);
        if (price === state.listPrice) return false;
        state.listPrice = price;
        return true;
    }
    if (state.values[name] === value) return false;
    state.values[name] = value;
    return true;
}

export function toggleFrozen(state: DesignerState, name: string): void {
    if (state.frozen.has(name)) {
        state.frozen.delete(name);
    } else {
        state.frozen.add(name);
    }
}

export function buildForecastBody(state: DesignerState): ForecastBody {
    const attributes: Record<string, AttrValue> = {};
    for (const f of widgetFeatures(state)) {
        attributes[f.name] = state.values[f.name] ?? null;
    }
    return {
        attributes,
        launch_week: state.launchWeek,
        list_price: state.listPrice,
    };
}

export function buildWhatIfBody(state: DesignerState, feature: string): WhatIfBody {
    return { ...buildForecastBody(state), feature };
}

export function buildCounterfactualBody(state: DesignerState): CounterfactualBody {
    const body: CounterfactualBody = {
        ...buildForecastBody(state),
        target: state.targetStr,
        epsilon: state.epsilon,
        seed: state.cfSeed,
    };
    if (state.frozen.size) {
        body.frozen_features = [...state.frozen].sort();
    }
    return body;
}

/** Trailing-edge debouncer for slider movement -> forecast requests. */
export function makeDebouncer(
    delayMs: number = FORECAST_DEBOUNCE_MS,
): (fn: () => void) => void {
    let handle: ReturnType<typeof setTimeout> | undefined;
    return (fn) => {
        if (handle !== undefined) clearTimeout(handle);
        handle = setTimeout(fn, delayMs);
    };
}

export interface BuyerFilters {
    category?: string;
    q?: string;
    strMin?: number;
    strMax?: number;
    sort: string;
    page: number;
    pageSize: number;
}

export function defaultBuyerFilters(): BuyerFilters {
    return { sort: "str_desc", page: 1, pageSize: 25 };
}

export function buildProductsQuery(filters: BuyerFilters): string {
    const params = new URLSearchParams();
    if (filters.category) params.set("category", filters.category);
    if (filters.q) params.set("q", filters.q);
    if (filters.strMin !== undefined) params.set("str_min", String(filters.strMin));
    if (filters.strMax !== undefined) params.set("str_max", String(filters.strMax));
    params.set("sort", filters.sort);
    params.set("page", String(filters.page));
    params.set("page_size", String(filters.pageSize));
    return params.toString();
}
