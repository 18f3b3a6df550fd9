/** Single configuration knob: where the forecasting service lives. */

declare global {
    // set e.g. <script>window.STR_STUDIO_API = "http://host:8000"</script>
    interface Window {
        STR_STUDIO_API?: string;
    }
}

const DEFAULT_BASE_URL = "http://127.0.0.1:8000";

export function apiBaseUrl(): string {
    if (typeof window !== "undefined" && window.STR_STUDIO_API) {
        return window.STR_STUDIO_API.replace(/\/$/, "");
    }
    return DEFAULT_BASE_URL;
}
