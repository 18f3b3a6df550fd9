/** Buyer view: catalog filters, summary histograms, product drill-down. */

import { ApiClient } from "./api.js";
import { BuyerFilters, buildProductsQuery, defaultBuyerFilters } from "./state.js";
import {
    renderHistogram,
    renderProductTable,
    renderProductView,
    renderSellerList,
} from "./render.js";
import type { ProductListResponse, SummaryResponse } from "./types.js";

export class BuyerController {
    filters: BuyerFilters = defaultBuyerFilters();
    list: ProductListResponse | null = null;
    summary: SummaryResponse | null = null;

    constructor(
        private api: ApiClient,
        private root: HTMLElement,
    ) {}

    async start(): Promise<void> {
        this.root.innerHTML = `
          <section class="panel"><h3>Catalog</h3>
            <form id="filters">
              <input id="filter-q" placeholder="search text">
              <input id="filter-category" placeholder="category">
              <input id="filter-str-min" type="number" min="0" max="1" step="0.05" placeholder="STR min">
              <input id="filter-str-max" type="number" min="0" max="1" step="0.05" placeholder="STR max">
              <select id="filter-sort">
                <option value="str_desc">best sellers first</option>
                <option value="str_asc">worst sellers first</option>
                <option value="id">by product id</option>
                <option value="price_asc">cheapest first</option>
                <option value="price_desc">priciest first</option>
              </select>
              <button type="submit">apply</button>
            </form>
            <div id="summaries"></div>
            <div id="products"></div></section>
          <section class="panel"><h3>Product</h3><div id="product-view"></div></section>`;
        this.bind();
        await this.refresh();
    }

    private bind(): void {
        this.root.querySelector("#filters")?.addEventListener("submit", (event) => {
            event.preventDefault();
            const value = (id: string) =>
                (this.root.querySelector(`#${id}`) as HTMLInputElement | null)?.value || undefined;
            this.filters = {
                ...defaultBuyerFilters(),
                q: value("filter-q"),
                category: value("filter-category"),
                strMin: value("filter-str-min") ? Number(value("filter-str-min")) : undefined,
                strMax: value("filter-str-max") ? Number(value("filter-str-max")) : undefined,
                sort: value("filter-sort") ?? "str_desc",
            };
            this.refresh();
        });
        this.root.addEventListener("click", (event) => {
            const el = (event.target as HTMLElement).closest("[data-product]");
            if (el) {
                event.preventDefault();
                this.openProduct(el.getAttribute("data-product")!);
            }
        });
    }

    async refresh(): Promise<void> {
        try {
            [this.list, this.summary] = await Promise.all([
                this.api.products(buildProductsQuery(this.filters)),
                this.api.summary("category"),
            ]);
        } catch {
            this.list = null;
            this.summary = null;
        }
        this.setHtml("products", renderProductTable(this.list));
        const groups = this.summary?.groups ?? [];
        const shown = this.filters.category
            ? groups.filter((g) => g.group === this.filters.category)
            : groups;
        this.setHtml(
            "summaries",
            shown
                .map(
                    (g) =>
                        renderHistogram(g) +
                        renderSellerList("best sellers", g.best) +
                        renderSellerList("worst sellers", g.worst),
                )
                .join(""),
        );
    }

    async openProduct(productId: string): Promise<void> {
        try {
            const view = await this.api.product(productId);
            this.setHtml("product-view", renderProductView(view));
        } catch {
            this.setHtml("product-view", renderProductView(null));
        }
    }

    private setHtml(id: string, html: string): void {
        const el = this.root.querySelector(`#${id}`);
        if (el) el.innerHTML = html;
    }
}
