/** API payload shapes for the forecasting service. */

export type AttrValue = string | number | null;

export interface FeatureDef {
    name: string;
    kind: "categorical" | "numeric";
    labels?: string[];
    range?: [number, number];
}

export interface SchemaResponse {
    features: FeatureDef[];
    fingerprint: string;
}

export interface ForecastBody {
    attributes: Record<string, AttrValue>;
    launch_week: number;
    list_price: number;
}

export interface Contribution {
    feature: string;
    value: number | null;
    phi: number;
}

export interface Attribution {
    base_value: number;
    predicted: number;
    contributions: Contribution[];
}

export interface ForecastResponse {
    mean: number;
    std_dev: number;
    interval: { coverage: number; lo: number; hi: number };
    attribution: Attribution;
}

export interface WhatIfBody extends ForecastBody {
    feature: string;
    candidates?: (string | number)[];
}

export interface SweepPoint {
    value: number;
    prediction: number;
    is_original: boolean;
    lo?: number;
    hi?: number;
    label?: string;
}

export interface WhatIfResponse {
    feature: string;
    points: SweepPoint[];
}

export interface CounterfactualBody extends ForecastBody {
    target: number;
    epsilon: number;
    frozen_features?: string[];
    mutable_features?: string[];
    seed?: number;
    generations?: number;
}

export interface DiffRow {
    feature: string;
    from: string | number | null;
    to: string | number | null;
}

export interface CounterfactualResponse {
    predicted: number;
    original_predicted: number;
    target: number;
    distance: number;
    feasible: boolean;
    diffs: DiffRow[];
    generations_run: number;
    seed: number;
}

export interface ProductSummaryRow {
    product_id: string;
    category: string;
    launch_week: number;
    list_price: number;
    attributes: Record<string, AttrValue>;
    str: number | null;
}

export interface ProductListResponse {
    items: ProductSummaryRow[];
    total: number;
    page: number;
    page_size: number;
}

export interface ProductView extends ProductSummaryRow {
    series: {
        week_offset: number[];
        sold: number[];
        received: number[];
        stock: number[];
        price: number[];
    };
    forecast: { mean: number; interval: { coverage: number; lo: number; hi: number } };
    attribution: Attribution;
}

export interface SummaryGroup {
    group: string;
    count: number;
    scored_count: number;
    histogram: { bin_edges: number[]; counts: number[] };
    mean_str: number | null;
    median_str: number | null;
    best: { product_id: string; str: number }[];
    worst: { product_id: string; str: number }[];
}

export interface SummaryResponse {
    group_by: string;
    groups: SummaryGroup[];
}

export interface DesignDraft {
    draft_id: string;
    attributes: Record<string, AttrValue>;
    category: string | null;
    launch_week: number | null;
    list_price: number | null;
    status: "docket" | "sample" | "ordered" | "rejected";
    images: string[];
    likes: number;
    feedback: { author: string; text: string; ts: string }[];
    created_at: string;
}
