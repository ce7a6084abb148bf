/**
 * Typed client for the analysis service HTTP API.
 *
 * Every call is appended to `requestLog`, which lets tests assert the
 * read-only contract: after a session exists, browsing (metric toggles,
 * token clicks, sidebar refreshes) must issue GET requests only.
 */

export type MetricKind =
  | "probability"
  | "surprisal"
  | "entropy"
  | "varentropy"
  | "skewentropy"
  | "perplexity";

export const METRIC_KINDS: MetricKind[] = [
  "probability",
  "surprisal",
  "entropy",
  "varentropy",
  "skewentropy",
  "perplexity",
];

export interface MetricSummary {
  mean: number;
  median: number;
  min: number;
  max: number;
}

export interface SessionReport {
  label: string;
  tokens: number;
  characters: number;
  metrics: Record<MetricKind, MetricSummary>;
  perplexity: number;
  log_probability: number;
  approximate: boolean;
  scatter: [number, number, number, string][];
  flags: [number, string[]][];
}

export interface MetricVector {
  kind: MetricKind;
  values: number[];
  intensities: number[];
  tokens: string[];
  approximate: boolean;
}

export interface TopkRow {
  token: string;
  token_id: number;
  probability: number;
  log_prob: number;
  selected: boolean;
}

export interface TopkResponse {
  position: number;
  token: string;
  approximate: boolean;
  alternatives: TopkRow[];
}

export interface SessionCreated {
  id: string;
  label: string;
  tokens: number;
}

export interface BackendSpec {
  base_url: string;
  model?: string;
  top_k?: number;
}

export interface RequestLogEntry {
  method: string;
  path: string;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

export class ApiClient {
  readonly requestLog: RequestLogEntry[] = [];

  constructor(private readonly baseUrl: string = "") {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
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
      } catch {
        // non-JSON error body, keep raw text
      }
      throw new ApiError(response.status, detail);
    }
    return JSON.parse(text) as T;
  }

  createSessionFromPrompt(
    prompt: string,
    backend?: BackendSpec,
    label?: string,
  ): Promise<SessionCreated> {
    return this.request("POST", "/sessions", { prompt, backend, label });
  }

  createSessionFromRecords(records: string, label?: string): Promise<SessionCreated> {
    return this.request("POST", "/sessions", { records, label });
  }

  report(sessionId: string): Promise<SessionReport> {
    return this.request("GET", `/sessions/${sessionId}/report`);
  }

  metric(sessionId: string, kind: MetricKind): Promise<MetricVector> {
    return this.request("GET", `/sessions/${sessionId}/metrics/${kind}`);
  }

  topk(sessionId: string, position: number, k = 10): Promise<TopkResponse> {
    return this.request("GET", `/sessions/${sessionId}/tokens/${position}/topk?k=${k}`);
  }

  monitorStatus(): Promise<Record<string, unknown>> {
    return this.request("GET", "/monitor/status");
  }
}
