/**
 * Browser entry point: wires the API client, view state, heatmap, top-k
 * popup, and sidebar into the page served from the service's --assets
 * directory. Analysis can start from a prompt (scored by the configured
 * backend) or from an uploaded record file.
 */
import { ApiClient, ApiError, METRIC_KINDS } from "./api.js";
import { heatmapSpans, spanColor } from "./heatmap.js";
import { sidebarModel } from "./sidebar.js";
import { initialState, isCurrent, withMetric, withSelection, withSession } from "./state.js";
import { validateTopk } from "./topk.js";
const client = new ApiClient("");
let state = initialState();
function el(id) {
    const node = document.getElementById(id);
    if (!node)
        throw new Error(`missing element #${id}`);
    return node;
}
const heatmapRoot = () => el("heatmap");
const sidebarRoot = () => el("sidebar");
const popupRoot = () => el("popup");
const bannerRoot = () => el("banner");
const toastRoot = () => el("toast");
function showBanner(message) {
    const banner = bannerRoot();
    banner.textContent = message;
    banner.hidden = false;
}
function clearBanner() {
    bannerRoot().hidden = true;
}
function showToast(message, retry) {
    const toast = toastRoot();
    toast.textContent = "";
    toast.append(message + " ");
    const button = document.createElement("button");
    button.textContent = "retry";
    button.addEventListener("click", () => {
        toast.hidden = true;
        retry();
    });
    toast.append(button);
    toast.hidden = false;
}
async function renderHeatmap() {
    if (!state.sessionId)
        return;
    const epoch = state.epoch;
    const kind = state.metric;
    try {
        const metric = await client.metric(state.sessionId, kind);
        if (!isCurrent(state, epoch))
            return; // superseded view, discard
        const root = heatmapRoot();
        root.textContent = "";
        clearBanner();
        for (const span of heatmapSpans(metric)) {
            const node = document.createElement("span");
            node.className = "token";
            node.textContent = span.text;
            node.title = span.tooltip;
            node.style.backgroundColor = spanColor(kind, span.intensity);
            node.dataset.position = String(span.position);
            node.addEventListener("click", () => selectToken(span.position));
            root.append(node);
        }
    }
    catch (error) {
        if (!isCurrent(state, epoch))
            return;
        heatmapRoot().textContent = ""; // no partial render
        showBanner(`cannot render ${kind}: ${String(error)}`);
    }
}
async function renderSidebar() {
    if (!state.sessionId)
        return;
    const epoch = state.epoch;
    const report = await client.report(state.sessionId);
    if (!isCurrent(state, epoch))
        return;
    const model = sidebarModel(report);
    const root = sidebarRoot();
    root.textContent = "";
    const head = document.createElement("div");
    head.className = "sidebar-head";
    head.textContent =
        `${model.label}: ${model.tokens} tokens, ${model.characters} chars, ` +
            `PPL ${model.perplexity}, mean ln P ${model.logProbability}` +
            (model.approximate ? " (approximate: top-k support)" : "");
    root.append(head);
    const table = document.createElement("table");
    const header = document.createElement("tr");
    for (const column of ["metric", "mean", "median", "min", "max"]) {
        const cell = document.createElement("th");
        cell.textContent = column;
        header.append(cell);
    }
    table.append(header);
    for (const row of model.rows) {
        const tr = document.createElement("tr");
        tr.className = row.kind === state.metric ? "active-metric" : "";
        for (const value of [row.kind, row.mean, row.median, row.min, row.max]) {
            const cell = document.createElement("td");
            cell.textContent = value;
            tr.append(cell);
        }
        tr.addEventListener("click", () => toggleMetric(row.kind));
        table.append(tr);
    }
    root.append(table);
}
function renderMetricButtons() {
    const root = el("metric-buttons");
    root.textContent = "";
    for (const kind of METRIC_KINDS) {
        const button = document.createElement("button");
        button.textContent = kind;
        button.className = kind === state.metric ? "active" : "";
        button.addEventListener("click", () => toggleMetric(kind));
        root.append(button);
    }
}
function toggleMetric(kind) {
    state = withMetric(state, kind);
    renderMetricButtons();
    void renderHeatmap();
    void renderSidebar(); // cached server-side; only a GET
}
function selectToken(position) {
    state = withSelection(state, position);
    void renderTopk(position);
}
async function renderTopk(position) {
    if (!state.sessionId)
        return;
    const epoch = state.epoch;
    const popup = popupRoot();
    try {
        const response = await client.topk(state.sessionId, position, 10);
        if (!isCurrent(state, epoch))
            return;
        const model = validateTopk(response);
        popup.textContent = "";
        const title = document.createElement("div");
        title.className = "popup-title";
        title.textContent = `position ${model.position}: "${model.token}"`;
        popup.append(title);
        const list = document.createElement("ol");
        for (const row of model.rows) {
            const item = document.createElement("li");
            item.textContent = `${row.token} : ${row.probability.toPrecision(4)}`;
            if (row.selected)
                item.className = "selected-token";
            list.append(item);
        }
        popup.append(list);
        const close = document.createElement("button");
        close.textContent = "close";
        close.addEventListener("click", () => {
            popup.hidden = true;
            state = withSelection(state, null);
        });
        popup.append(close);
        popup.hidden = false;
    }
    catch (error) {
        if (!isCurrent(state, epoch))
            return;
        showToast(`top-k fetch failed: ${String(error)}`, () => renderTopk(position));
    }
}
async function startSession(create) {
    try {
        clearBanner();
        const created = await create();
        state = withSession(state, created.id, created.tokens);
        renderMetricButtons();
        await Promise.all([renderHeatmap(), renderSidebar()]);
    }
    catch (error) {
        const detail = error instanceof ApiError ? error.detail : String(error);
        showBanner(`analysis failed: ${detail}`);
    }
}
function wireForms() {
    el("prompt-form").addEventListener("submit", (event) => {
        event.preventDefault();
        const prompt = el("prompt-input").value;
        const backendUrl = el("backend-input").value.trim();
        const backend = backendUrl ? { base_url: backendUrl } : undefined;
        void startSession(() => client.createSessionFromPrompt(prompt, backend, "prompt"));
    });
    el("records-input").addEventListener("change", async (event) => {
        const input = event.target;
        const file = input.files?.[0];
        if (!file)
            return;
        const records = await file.text();
        void startSession(() => client.createSessionFromRecords(records, file.name));
    });
}
document.addEventListener("DOMContentLoaded", () => {
    renderMetricButtons();
    wireForms();
});
