/** HTTP client: every number shown in the UI originates here.
 *
 * Transport is injectable so tests can mock the service. Mutable-channel
 * requests (forecast, what-if) abort any in-flight predecessor; the
 * counterfactual channel instead tags each request with a client id so a
 * slow stale response can never overwrite a newer result.
 */

import type {
    CounterfactualBody,
    CounterfactualResponse,
    DesignDraft,
    ForecastBody,
    ForecastResponse,
    ProductListResponse,
    ProductView,
    SchemaResponse,
    SummaryResponse,
    WhatIfBody,
    WhatIfResponse,
} from "./types.js";

export interface Transport {
    (path: string, init: RequestInit): Promise<unknown>;
}

export class ApiError extends Error {
    constructor(
        public status: number,
        public code: string,
        message: string,
        public field?: string,
    ) {
        super(message);
    }
}

export function fetchTransport(baseUrl: string): Transport {
    return async (path, init) => {
        const resp = await fetch(baseUrl + path, {
            ...init,
            headers: { "content-type": "application/json", ...(init.headers ?? {}) },
        });
        const body: unknown = await resp.json();
        if (!resp.ok) {
            const err = body as { code?: string; message?: string; field?: string };
            throw new ApiError(resp.status, err.code ?? "error", err.message ?? "request failed", err.field);
        }
        return body;
    };
}

export class ApiClient {
    private controllers = new Map<string, AbortController>();
    private cfCounter = 0;

    constructor(private transport: Transport) {}

    /** Abort whatever is still in flight on this channel, then own it. */
    private channelSignal(channel: string): AbortSignal {
        this.controllers.get(channel)?.abort();
        const controller = new AbortController();
        this.controllers.set(channel, controller);
        return controller.signal;
    }

    private get(path: string): Promise<unknown> {
        return this.transport(path, { method: "GET" });
    }

    private post(path: string, body: unknown, signal?: AbortSignal): Promise<unknown> {
        return this.transport(path, { method: "POST", body: JSON.stringify(body), signal });
    }

    schema(): Promise<SchemaResponse> {
        return this.get("/schema") as Promise<SchemaResponse>;
    }

    forecast(body: ForecastBody): Promise<ForecastResponse> {
        return this.post("/forecast", body, this.channelSignal("forecast")) as Promise<ForecastResponse>;
    }

    whatIf(body: WhatIfBody): Promise<WhatIfResponse> {
        return this.post("/whatif", body, this.channelSignal("whatif")) as Promise<WhatIfResponse>;
    }

    /** Returns the client request id with the response promise. */
    counterfactual(body: CounterfactualBody): { id: number; result: Promise<CounterfactualResponse> } {
        const id = ++this.cfCounter;
        return { id, result: this.post("/counterfactual", body) as Promise<CounterfactualResponse> };
    }

    latestCounterfactualId(): number {
        return this.cfCounter;
    }

    products(query: string): Promise<ProductListResponse> {
        return this.get(`/products${query ? "?" + query : ""}`) as Promise<ProductListResponse>;
    }

    product(id: string): Promise<ProductView> {
        return this.get(`/products/${encodeURIComponent(id)}`) as Promise<ProductView>;
    }

    summary(groupBy: string): Promise<SummaryResponse> {
        return this.get(`/summary?group_by=${encodeURIComponent(groupBy)}`) as Promise<SummaryResponse>;
    }

    createDesign(body: {
        attributes: Record<string, unknown>;
        category?: string;
        launch_week?: number;
        list_price?: number;
        images?: string[];
    }): Promise<DesignDraft> {
        return this.post("/designs", body) as Promise<DesignDraft>;
    }

    likeDesign(draftId: string): Promise<DesignDraft> {
        return this.post(`/designs/${encodeURIComponent(draftId)}/like`, {}) as Promise<DesignDraft>;
    }

    sendFeedback(draftId: string, author: string, text: string): Promise<DesignDraft> {
        return this.post(`/designs/${encodeURIComponent(draftId)}/feedback`, { author, text }) as Promise<DesignDraft>;
    }
}
