import {
  DatasetPayload,
  GridPayload,
  GridRequest,
  HealthPayload,
  InterpolatePayload,
  JobSnapshot,
  OptimizeRequest,
  OptimizeSubmitPayload,
  RenderPayload,
} from "./types.js";

// The server reports failures as {"error": tag, "detail": text} with a 4xx
// or 5xx status. Anything that does not parse that way becomes tag
// "network" so callers can always switch on err.tag.
export class ApiError extends Error {
  tag: string;
  status: number;

  constructor(tag: string, detail: string, status: number) {
    super(detail);
    this.tag = tag;
    this.status = status;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private doFetch: FetchLike;

  constructor(fetchImpl?: FetchLike) {
    this.doFetch = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.doFetch(
        path,
        body === undefined
          ? undefined
          : {
              method: "POST",
              headers: { "Content-Type": "application/json" },
              body: JSON.stringify(body),
            }
      );
    } catch (err) {
      throw new ApiError("network", err instanceof Error ? err.message : String(err), 0);
    }
    if (!response.ok) {
      let tag = "network";
      let detail = `request failed with status ${response.status}`;
      try {
        const parsed = await response.json();
        if (parsed && typeof parsed.error === "string") {
          tag = parsed.error;
          detail = typeof parsed.detail === "string" ? parsed.detail : detail;
        }
      } catch {
        // non-JSON error body, keep the status message
      }
      throw new ApiError(tag, detail, response.status);
    }
    return (await response.json()) as T;
  }

  health(): Promise<HealthPayload> {
    return this.request<HealthPayload>("/api/health");
  }

  dataset(): Promise<DatasetPayload> {
    return this.request<DatasetPayload>("/api/dataset");
  }

  render(smiles: string): Promise<RenderPayload> {
    return this.request<RenderPayload>("/api/render", { smiles });
  }

  grid(req: GridRequest): Promise<GridPayload> {
    return this.request<GridPayload>("/api/grid", req);
  }

  interpolate(from: string, to: string, steps: number): Promise<InterpolatePayload> {
    return this.request<InterpolatePayload>("/api/interpolate", { from, to, steps });
  }

  optimize(req: OptimizeRequest): Promise<OptimizeSubmitPayload> {
    return this.request<OptimizeSubmitPayload>("/api/optimize", req);
  }

  job(jobId: string): Promise<JobSnapshot> {
    return this.request<JobSnapshot>(`/api/jobs/${jobId}`);
  }
}

// Each panel owns one gate. Take a token before firing a request and check
// it when the response lands; a response whose token is no longer current
// belongs to an abandoned request and must be dropped, not applied. This is
// the only concurrency control in the client, there is no request queue.
export class SequenceGate {
  private seq = 0;

  next(): number {
    this.seq += 1;
    return this.seq;
  }

  isCurrent(token: number): boolean {
    return token === this.seq;
  }
}
