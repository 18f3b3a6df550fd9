/** Designer view: widget edits drive live forecasts; counterfactual search
 * runs only on explicit request (it is seconds-scale server side). */

import { ApiClient } from "./api.js";
import {
    DesignerState,
    buildCounterfactualBody,
    buildForecastBody,
    buildWhatIfBody,
    commitWidget,
    initDesignerState,
    makeDebouncer,
    toggleFrozen,
    widgetFeatures,
} from "./state.js";
import {
    renderDiffTable,
    renderDraftCard,
    renderForecastCard,
    renderFrozenToggles,
    renderSweepChart,
    renderWaterfall,
    renderWidgets,
} from "./render.js";
import type { CounterfactualResponse, DesignDraft, ForecastResponse, WhatIfResponse } from "./types.js";

export class DesignerController {
    state!: DesignerState;
    forecast: ForecastResponse | null = null;
    whatIf: WhatIfResponse | null = null;
    cfResult: CounterfactualResponse | null = null;
    draft: DesignDraft | null = null;
    private debounce = makeDebouncer();

    constructor(
        private api: ApiClient,
        private root: HTMLElement,
    ) {}

    async start(): Promise<void> {
        const schema = await this.api.schema();
        this.state = initDesignerState(schema);
        this.root.innerHTML = `
          <section class="panel" id="widgets-panel"><h3>Design attributes</h3>
            <div id="widgets"></div></section>
          <section class="panel"><h3>Live forecast</h3>
            <div id="forecast"></div><div id="waterfall"></div></section>
          <section class="panel"><h3>What-if sweep</h3>
            <select id="sweep-feature"></select><div id="sweep"></div></section>
          <section class="panel"><h3>Counterfactual</h3>
            <label>target STR <input type="range" id="cf-target" min="0" max="1" step="0.01"
              value="${this.state.targetStr}"><span id="cf-target-value">${this.state.targetStr}</span></label>
            <div id="frozen"></div>
            <button id="cf-suggest">suggest changes</button>
            <div id="diff"></div></section>
          <section class="panel"><h3>Draft</h3>
            <button id="draft-save">save as docket</button>
            <div id="draft-card"></div>
            <form id="draft-feedback" hidden>
              <input id="feedback-author" placeholder="your name">
              <input id="feedback-text" placeholder="comment">
              <button type="submit">send</button>
            </form></section>`;
        this.renderAll();
        this.bind();
        this.refreshForecast();
    }

    private bind(): void {
        this.root.addEventListener("input", (event) => {
            const el = event.target as HTMLElement;
            const widget = el.getAttribute("data-widget");
            if (widget) {
                const input = el as HTMLInputElement | HTMLSelectElement;
                const feature = this.state.features.find((f) => f.name === widget);
                const numeric = feature?.kind !== "categorical";
                const value = numeric ? Number(input.value) : input.value;
                if (commitWidget(this.state, widget, value)) {
                    this.debounce(() => this.refreshForecast());
                }
                return;
            }
            if (el.id === "cf-target") {
                this.state.targetStr = Number((el as HTMLInputElement).value);
                this.setText("cf-target-value", String(this.state.targetStr));
            }
            const freeze = el.getAttribute("data-freeze");
            if (freeze) {
                toggleFrozen(this.state, freeze);
            }
        });
        this.root.addEventListener("change", (event) => {
            const el = event.target as HTMLSelectElement;
            if (el.id === "sweep-feature") {
                this.refreshWhatIf(el.value);
            }
        });
        this.root.querySelector("#cf-suggest")?.addEventListener("click", () => this.runCounterfactual());
        this.root.querySelector("#draft-save")?.addEventListener("click", () => this.saveDraft());
        this.root.addEventListener("click", (event) => {
            const like = (event.target as HTMLElement).getAttribute("data-like");
            if (like) this.likeDraft(like);
        });
        this.root.querySelector("#draft-feedback")?.addEventListener("submit", (event) => {
            event.preventDefault();
            const value = (id: string) =>
                (this.root.querySelector(`#${id}`) as HTMLInputElement | null)?.value ?? "";
            if (this.draft) this.sendFeedback(this.draft.draft_id, value("feedback-author"), value("feedback-text"));
        });
    }

    async saveDraft(): Promise<void> {
        this.draft = await this.api.createDesign({
            attributes: buildForecastBody(this.state).attributes,
            launch_week: this.state.launchWeek,
            list_price: this.state.listPrice,
        });
        this.renderDraft();
    }

    async likeDraft(draftId: string): Promise<void> {
        this.draft = await this.api.likeDesign(draftId);
        this.renderDraft();
    }

    async sendFeedback(draftId: string, author: string, text: string): Promise<void> {
        this.draft = await this.api.sendFeedback(draftId, author, text);
        this.renderDraft();
    }

    private renderDraft(): void {
        this.setHtml("draft-card", this.draft ? renderDraftCard(this.draft) : "");
        const form = this.root.querySelector("#draft-feedback") as HTMLElement | null;
        if (form) form.hidden = this.draft === null;
    }

    private renderAll(): void {
        this.setHtml("widgets", renderWidgets(this.state));
        this.setHtml("forecast", renderForecastCard(this.forecast));
        this.setHtml("waterfall", renderWaterfall(this.forecast?.attribution ?? null));
        this.setHtml("frozen", renderFrozenToggles(widgetFeatures(this.state), this.state.frozen));
        this.setHtml("diff", renderDiffTable(this.cfResult));
        const select = this.root.querySelector("#sweep-feature") as HTMLSelectElement | null;
        if (select && !select.options.length) {
            for (const f of widgetFeatures(this.state)) {
                const option = document.createElement("option");
                option.value = f.name;
                option.textContent = f.name;
                select.appendChild(option);
            }
        }
    }

    async refreshForecast(): Promise<void> {
        try {
            this.forecast = await this.api.forecast(buildForecastBody(this.state));
        } catch (err) {
            if ((err as Error).name === "AbortError") return;
            this.forecast = null;
        }
        this.setHtml("forecast", renderForecastCard(this.forecast));
        this.setHtml("waterfall", renderWaterfall(this.forecast?.attribution ?? null));
    }

    async refreshWhatIf(feature: string): Promise<void> {
        try {
            this.whatIf = await this.api.whatIf(buildWhatIfBody(this.state, feature));
        } catch (err) {
            if ((err as Error).name === "AbortError") return;
            this.whatIf = null;
        }
        this.setHtml("sweep", renderSweepChart(feature, this.whatIf?.points ?? null));
    }

    async runCounterfactual(): Promise<void> {
        const { id, result } = this.api.counterfactual(buildCounterfactualBody(this.state));
        this.setHtml("diff", `<div class="searching">searching…</div>`);
        try {
            const body = await result;
            if (id !== this.api.latestCounterfactualId()) return; // stale response
            this.cfResult = body;
        } catch {
            this.cfResult = null;
        }
        this.setHtml("diff", renderDiffTable(this.cfResult));
    }

    private setHtml(id: string, html: string): void {
        const el = this.root.querySelector(`#${id}`);
        if (el) el.innerHTML = html;
    }

    private setText(id: string, text: string): void {
        const el = this.root.querySelector(`#${id}`);
        if (el) el.textContent = text;
    }
}
