/**
 * Typed client for the analysis service HTTP API.
 *
 * Every call is appended to `requestLog`, which lets tests assert the
 * read-only contract: after a session exists, browsing (metric toggles,
 * token clicks, sidebar refreshes) must issue GET requests only.
 */
export const METRIC_KINDS = [
    "probability",
    "surprisal",
    "entropy",
    "varentropy",
    "skewentropy",
    "perplexity",
];
export class ApiError extends Error {
    constructor(status, detail) {
        super(`HTTP ${status}: ${detail}`);
        this.status = status;
        this.detail = detail;
    }
}
export class ApiClient {
    constructor(baseUrl = "") {
        this.baseUrl = baseUrl;
        this.requestLog = [];
    }
    async request(method, path, body) {
        this.requestLog.push({ method, path });
        const response = await fetch(this.baseUrl + path, {
            method,
            headers: body === undefined ? undefined : { "Content-Type": "application/json" },
            body: body === undefined ? undefined : JSON.stringify(body),
        });
        const text = await response.text();
        if (!response.ok) {
            let detail = text;
            try {
                detail = JSON.parse(text).detail ?? text;
            }
            catch {
                // non-JSON error body, keep raw text
            }
            throw new ApiError(response.status, detail);
        }
        return JSON.parse(text);
    }
    createSessionFromPrompt(prompt, backend, label) {
        return this.request("POST", "/sessions", { prompt, backend, label });
    }
    createSessionFromRecords(records, label) {
        return this.request("POST", "/sessions", { records, label });
    }
    report(sessionId) {
        return this.request("GET", `/sessions/${sessionId}/report`);
    }
    metric(sessionId, kind) {
        return this.request("GET", `/sessions/${sessionId}/metrics/${kind}`);
    }
    topk(sessionId, position, k = 10) {
        return this.request("GET", `/sessions/${sessionId}/tokens/${position}/topk?k=${k}`);
    }
    monitorStatus() {
        return this.request("GET", "/monitor/status");
    }
}
