/** Mocked API fixture set shared by the frontend tests. */

import type {
    CounterfactualResponse,
    ForecastResponse,
    ProductListResponse,
    ProductView,
    SchemaResponse,
    SummaryResponse,
    WhatIfResponse,
} from "../src/types.js";
import type { Transport } from "../src/api.js";

export const SCHEMA: SchemaResponse = {
    fingerprint: "abc123",
    features: [
        { name: "color_hue", kind: "numeric", range: [0, 360] },
        { name: "color_saturation", kind: "numeric", range: [0, 1] },
        { name: "color_value", kind: "numeric", range: [0, 1] },
        { name: "length", kind: "categorical", labels: ["above knee", "crop", "knee", "maxi", "regular"] },
        { name: "neckline", kind: "categorical", labels: ["boat", "round", "strap", "v-neck"] },
        { name: "pattern", kind: "categorical", labels: ["floral", "solid", "striped"] },
        { name: "list_price", kind: "numeric", range: [299, 2999] },
        { name: "launch_week", kind: "numeric", range: [5, 40] },
    ],
};

export const FORECAST: ForecastResponse = {
    mean: 0.217,
    std_dev: 0.041,
    interval: { coverage: 0.9, lo: 0.1498, hi: 0.2842 },
    attribution: {
        base_value: 0.2308,
        predicted: 0.217,
        contributions: [
            { feature: "color_hue", value: 11.0526, phi: -0.0601 },
            { feature: "color_saturation", value: 0.18, phi: 0.0112 },
            { feature: "color_value", value: 0.8274, phi: -0.0043 },
            { feature: "length", value: 1, phi: -0.0205 },
            { feature: "neckline", value: 2, phi: 0.0177 },
            { feature: "pattern", value: 2, phi: 0.0, },
            { feature: "list_price", value: 2036.5, phi: 0.0422 },
            { feature: "launch_week", value: 22, phi: 0.0 },
        ],
    },
};

export const WHATIF: WhatIfResponse = {
    feature: "neckline",
    points: [
        { value: 1, label: "boat", prediction: 0.2011, is_original: false, lo: 0.13, hi: 0.27 },
        { value: 2, label: "round", prediction: 0.217, is_original: true, lo: 0.15, hi: 0.28 },
        { value: 3, label: "strap", prediction: 0.2755, is_original: false, lo: 0.2, hi: 0.35 },
        { value: 4, label: "v-neck", prediction: 0.231, is_original: false, lo: 0.16, hi: 0.3 },
    ],
};

/** The sample-dress shaped counterfactual: five feature rows plus price. */
export const CF_RESULT: CounterfactualResponse = {
    predicted: 0.6056,
    original_predicted: 0.217,
    target: 0.6,
    distance: 1.84,
    feasible: true,
    diffs: [
        { feature: "color_hue", from: 11.0526, to: 11.33 },
        { feature: "color_saturation", from: 0.18, to: 0.2465 },
        { feature: "color_value", from: 0.8274, to: 0.8712 },
        { feature: "length", from: "above knee", to: "regular" },
        { feature: "neckline", from: "round", to: "strap" },
    ],
    generations_run: 200,
    seed: 0,
};

export const CF_RESTRICTED: CounterfactualResponse = {
    predicted: 0.5865,
    original_predicted: 0.217,
    target: 0.6,
    distance: 3.0,
    feasible: true,
    diffs: [
        { feature: "pattern", from: "solid", to: "striped" },
        { feature: "length", from: "above knee", to: "regular" },
        { feature: "neckline", from: "round", to: "button down" },
    ],
    generations_run: 200,
    seed: 0,
};

export const PRODUCTS: ProductListResponse = {
    items: [
        {
            product_id: "P00007",
            category: "tops",
            launch_week: 18,
            list_price: 899.0,
            attributes: { pattern: "floral", neckline: "round" },
            str: 0.74,
        },
        {
            product_id: "P00003",
            category: "tops",
            launch_week: 12,
            list_price: 1299.0,
            attributes: { pattern: "solid", neckline: "strap" },
            str: 0.41,
        },
    ],
    total: 2,
    page: 1,
    page_size: 25,
};

export const SUMMARY: SummaryResponse = {
    group_by: "category",
    groups: [
        {
            group: "tops",
            count: 2,
            scored_count: 2,
            histogram: {
                bin_edges: [0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1],
                counts: [0, 0, 0, 0, 1, 0, 0, 1, 0, 0],
            },
            mean_str: 0.575,
            median_str: 0.575,
            best: [{ product_id: "P00007", str: 0.74 }],
            worst: [{ product_id: "P00003", str: 0.41 }],
        },
    ],
};

export const PRODUCT_VIEW: ProductView = {
    ...PRODUCTS.items[0]!,
    series: {
        week_offset: [0, 1, 2, 3, 4],
        sold: [40, 27, 19, 14, 3],
        received: [100, 0, 0, 0, 0],
        stock: [60, 33, 14, 0, 0],
        price: [899, 899, 899, 899, 899],
    },
    forecast: { mean: 0.71, interval: { coverage: 0.9, lo: 0.6, hi: 0.82 } },
    attribution: FORECAST.attribution,
};

export interface RecordedCall {
    path: string;
    method: string;
    body: unknown;
    signal?: AbortSignal | null;
}

/** Transport that replays fixtures and records every request it saw. */
export function mockTransport(overrides: Record<string, unknown> = {}) {
    const calls: RecordedCall[] = [];
    const transport: Transport = async (path, init) => {
        calls.push({
            path,
            method: init.method ?? "GET",
            body: init.body ? JSON.parse(init.body as string) : undefined,
            signal: init.signal,
        });
        const bare = path.split("?")[0]!;
        if (bare in overrides) {
            const value = overrides[bare];
            if (value instanceof Error) throw value;
            return value;
        }
        if (bare === "/schema") return SCHEMA;
        if (bare === "/forecast") return FORECAST;
        if (bare === "/whatif") return WHATIF;
        if (bare === "/counterfactual") return CF_RESULT;
        if (bare === "/products") return PRODUCTS;
        if (bare.startsWith("/products/")) return PRODUCT_VIEW;
        if (bare === "/summary") return SUMMARY;
        throw new Error(`no fixture for ${path}`);
    };
    return { transport, calls };
}
