/** Bootstrap: tab between the designer and buyer views. */

import { ApiClient, fetchTransport } from "./api.js";
import { apiBaseUrl } from "./config.js";
import { DesignerController } from "./designer.js";
import { BuyerController } from "./buyer.js";

function main(): void {
    const api = new ApiClient(fetchTransport(apiBaseUrl()));
    const designerRoot = document.getElementById("designer-view");
    const buyerRoot = document.getElementById("buyer-view");
    if (!designerRoot || !buyerRoot) return;

    const designer = new DesignerController(api, designerRoot);
    const buyer = new BuyerController(api, buyerRoot);
    designer.start().catch((err) => {
        designerRoot.innerHTML = `<p class="error">service unreachable: ${String(err)}</p>`;
    });
    buyer.start().catch((err) => {
        buyerRoot.innerHTML = `<p class="error">service unreachable: ${String(err)}</p>`;
    });

    document.querySelectorAll("[data-tab]").forEach((button) => {
        button.addEventListener("click", () => {
            const tab = button.getAttribute("data-tab");
            designerRoot.hidden = tab !== "designer";
            buyerRoot.hidden = tab !== "buyer";
        });
    });
}

main();
