import type {
  ConditionFileV1,
  ErrorPayload,
  FramesPayload,
  GraphSummary,
  SearchResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public payload: ErrorPayload,
  ) {
    super(payload.message);
  }
}

export interface SearchOutcome {
  parsed: SearchResponse;
  /** exact response bytes as text; the session hashes a slice of this */
  rawBody: string;
}

/**
 * Client for the motiongraph HTTP API. Search calls are latest-wins: firing
 * a new search aborts the in-flight one, so the viewer never renders a
 * stale response over a newer edit.
 */
export class Client {
  private inflight: AbortController | null = null;

  constructor(public baseUrl: string = "") {}

  private async getJson<T>(path: string): Promise<T> {
    const resp = await fetch(this.baseUrl + path);
    const body = await resp.text();
    if (!resp.ok) throw new ApiError(resp.status, JSON.parse(body) as ErrorPayload);
    return JSON.parse(body) as T;
  }

  health(): Promise<{ status: string; nodes: number }> {
    return this.getJson("/v1/health");
  }

  graphSummary(): Promise<GraphSummary> {
    return this.getJson("/v1/graph/summary");
  }

  frames(from: number, to: number): Promise<FramesPayload> {
    return this.getJson(`/v1/frames?from=${from}&to=${to}`);
  }

  private async post(path: string, condition: ConditionFileV1): Promise<SearchOutcome> {
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    const resp = await fetch(this.baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(condition),
      signal: controller.signal,
    });
    const rawBody = await resp.text();
    if (this.inflight === controller) this.inflight = null;
    if (!resp.ok) throw new ApiError(resp.status, JSON.parse(rawBody) as ErrorPayload);
    return { parsed: JSON.parse(rawBody) as SearchResponse, rawBody };
  }

  search(condition: ConditionFileV1, searcher: "dp" | "beam" = "dp"): Promise<SearchOutcome> {
    return this.post(`/v1/search?searcher=${searcher}`, condition);
  }

  keyframeSearch(condition: ConditionFileV1): Promise<SearchOutcome> {
    return this.post("/v1/keyframe-search", condition);
  }
}
