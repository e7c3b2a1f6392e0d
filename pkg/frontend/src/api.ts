import type {
  ApiErrorDoc,
  ComparisonDoc,
  ExplanationDoc,
  ExplanationRequest,
  JobDoc,
  LogStats,
  LogSummary,
  PredictResponse,
  ResultRow,
  SplitRecord,
  SplitSpecDoc,
  SubmitResponse,
  TrainingRequestDoc,
  UploadedLog,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** A non-2xx gateway response, carrying the structured error envelope. */
export class ApiError extends Error {
  readonly code: string;
  readonly detail: unknown;
  readonly status: number;

  constructor(status: number, doc: ApiErrorDoc) {
    super(doc.message);
    this.name = "ApiError";
    this.code = doc.code;
    this.detail = doc.detail;
    this.status = status;
  }
}

/** fetch itself rejected: server unreachable, DNS, aborted, and so on. */
export class NetworkError extends Error {
  constructor(cause: unknown) {
    super(cause instanceof Error ? cause.message : String(cause));
    this.name = "NetworkError";
  }
}

async function errorFrom(response: Response): Promise<ApiError> {
  let doc: ApiErrorDoc;
  try {
    doc = (await response.json()) as ApiErrorDoc;
  } catch {
    doc = { code: "http_error", message: `HTTP ${response.status}`, detail: null };
  }
  return new ApiError(response.status, doc);
}

/**
 * Typed client for the /v1 gateway. Stateless: every method is one request.
 * The fetch implementation is injectable so tests can run against a fixture.
 */
export class GatewayClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl = "", fetchImpl?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.fetchImpl =
      fetchImpl ?? ((input, init) => globalThis.fetch(input, init));
  }

  url(path: string): string {
    return `${this.base}${path}`;
  }

  private async request<T>(method: string, path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.url(path), { method, ...init });
    } catch (cause) {
      throw new NetworkError(cause);
    }
    if (!response.ok) throw await errorFrom(response);
    return (await response.json()) as T;
  }

  private getJson<T>(path: string): Promise<T> {
    return this.request<T>("GET", path);
  }

  private postJson<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>("POST", path, {
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  // ---- logs ----

  listLogs(): Promise<LogSummary[]> {
    return this.getJson("/v1/logs");
  }

  uploadLog(xes: string | Blob): Promise<UploadedLog> {
    return this.request("POST", "/v1/logs", {
      headers: { "content-type": "application/xml" },
      body: xes,
    });
  }

  logStats(id: string): Promise<LogStats> {
    return this.getJson(`/v1/logs/${encodeURIComponent(id)}/stats`);
  }

  // ---- splits ----

  listSplits(): Promise<SplitRecord[]> {
    return this.getJson("/v1/splits");
  }

  createSplit(spec: SplitSpecDoc, filters?: unknown[]): Promise<SplitRecord> {
    const body = filters && filters.length ? { ...spec, filters } : spec;
    return this.postJson("/v1/splits", body);
  }

  // ---- jobs ----

  submitTraining(request: TrainingRequestDoc): Promise<SubmitResponse> {
    return this.postJson("/v1/jobs", request);
  }

  listJobs(status?: string): Promise<JobDoc[]> {
    const query = status ? `?status=${encodeURIComponent(status)}` : "";
    return this.getJson(`/v1/jobs${query}`);
  }

  getJob(id: string): Promise<JobDoc> {
    return this.getJson(`/v1/jobs/${encodeURIComponent(id)}`);
  }

  // ---- results ----

  listResults(): Promise<ResultRow[]> {
    return this.getJson("/v1/results");
  }

  comparison(ids: string[]): Promise<ComparisonDoc> {
    return this.getJson(`/v1/results/comparison?ids=${ids.map(encodeURIComponent).join(",")}`);
  }

  /** Href for the CSV passthrough; download happens in the browser, untouched. */
  exportCsvUrl(ids?: string[]): string {
    const query = ids && ids.length ? `?ids=${ids.map(encodeURIComponent).join(",")}` : "";
    return this.url(`/v1/results/export.csv${query}`);
  }

  // ---- prediction and explanation ----

  explain(request: ExplanationRequest): Promise<ExplanationDoc> {
    return this.postJson("/v1/explanations", request);
  }

  predict(fingerprint: string, body: unknown): Promise<PredictResponse> {
    return this.postJson(`/v1/models/${encodeURIComponent(fingerprint)}/predict`, body);
  }
}
