/** API client: wire fidelity, cancellation, stale-response discard. */

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { buildCounterfactualBody, buildForecastBody, commitWidget, initDesignerState, toggleFrozen } from "../src/state.js";
import { CF_RESULT, SCHEMA, mockTransport } from "./fixtures.js";

function dressState() {
    const state = initDesignerState(SCHEMA);
    commitWidget(state, "color_hue", 11.0526);
    commitWidget(state, "length", "above knee");
    commitWidget(state, "neckline", "round");
    commitWidget(state, "launch_week", 22);
    commitWidget(state, "list_price", 2036.5);
    return state;
}

describe("wire fidelity", () => {
    it("posts the committed widget state verbatim as the forecast body", async () => {
        const { transport, calls } = mockTransport();
        const api = new ApiClient(transport);
        const state = dressState();
        await api.forecast(buildForecastBody(state));
        expect(calls).toHaveLength(1);
        expect(calls[0]!.path).toBe("/forecast");
        expect(calls[0]!.method).toBe("POST");
        expect(calls[0]!.body).toEqual(buildForecastBody(state));
    });

    it("posts frozen features with the counterfactual request", async () => {
        const { transport, calls } = mockTransport();
        const api = new ApiClient(transport);
        const state = dressState();
        toggleFrozen(state, "color_hue");
        toggleFrozen(state, "color_value");
        const { result } = api.counterfactual(buildCounterfactualBody(state));
        await result;
        expect((calls[0]!.body as { frozen_features: string[] }).frozen_features).toEqual([
            "color_hue",
            "color_value",
        ]);
    });

    it("encodes list filters in the products query", async () => {
        const { transport, calls } = mockTransport();
        const api = new ApiClient(transport);
        await api.products("category=tops&sort=str_desc&page=1&page_size=25");
        expect(calls[0]!.path).toBe("/products?category=tops&sort=str_desc&page=1&page_size=25");
        expect(calls[0]!.method).toBe("GET");
    });

    it("design widgets hit the design endpoints with exact bodies", async () => {
        const draft = { draft_id: "D00001", attributes: {}, category: null, launch_week: 12,
                        list_price: 999, status: "docket", images: [], likes: 0, feedback: [],
                        created_at: "" };
        const { transport, calls } = mockTransport({
            "/designs": draft,
            "/designs/D00001/like": { ...draft, likes: 1 },
            "/designs/D00001/feedback": draft,
        });
        const api = new ApiClient(transport);
        await api.createDesign({ attributes: { pattern: "floral" }, launch_week: 12, list_price: 999 });
        await api.likeDesign("D00001");
        await api.sendFeedback("D00001", "buyer1", "love it");
        expect(calls.map((c) => [c.path, c.method])).toEqual([
            ["/designs", "POST"],
            ["/designs/D00001/like", "POST"],
            ["/designs/D00001/feedback", "POST"],
        ]);
        expect(calls[0]!.body).toEqual({ attributes: { pattern: "floral" }, launch_week: 12, list_price: 999 });
        expect(calls[2]!.body).toEqual({ author: "buyer1", text: "love it" });
    });
});

describe("in-flight cancellation", () => {
    it("aborts the previous forecast when a newer commit fires", async () => {
        const { transport, calls } = mockTransport();
        const api = new ApiClient(transport);
        const state = dressState();
        const first = api.forecast(buildForecastBody(state));
        commitWidget(state, "neckline", "strap");
        const second = api.forecast(buildForecastBody(state));
        await Promise.all([first, second]);
        expect(calls).toHaveLength(2);
        expect(calls[0]!.signal?.aborted).toBe(true);
        expect(calls[1]!.signal?.aborted).toBe(false);
    });
});

describe("stale counterfactual discard", () => {
    it("a slow first search can never overwrite a newer result", async () => {
        let firstResolve: (value: unknown) => void = () => undefined;
        const slowFirst = new Promise((resolve) => (firstResolve = resolve));
        let call = 0;
        const api = new ApiClient(async () => {
            call += 1;
            if (call === 1) return slowFirst;
            return { ...CF_RESULT, seed: 2 };
        });
        const state = dressState();
        const first = api.counterfactual(buildCounterfactualBody(state));
        state.cfSeed = 2;
        const second = api.counterfactual(buildCounterfactualBody(state));
        const kept = await second.result;
        expect(second.id).toBe(api.latestCounterfactualId());
        firstResolve({ ...CF_RESULT, seed: 1 });
        const stale = await first.result;
        // the controller drops any response whose id is not the latest
        expect(first.id).not.toBe(api.latestCounterfactualId());
        expect(stale.seed).toBe(1);
        expect(kept.seed).toBe(2);
    });
});
