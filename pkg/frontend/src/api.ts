/** Thin typed client for the review service JSON API. */

export interface Sample {
  sample_id: string;
  transcript: string;
  duration_s?: number;
  audio_url: string;
}

export interface BatchResponse {
  samples: Sample[];
  empty: boolean;
}

export interface VerdictRequest {
  sample_id: string;
  verdict: "confirmed" | "corrected";
  corrected_transcript?: string;
  reviewer_id?: string;
}

export interface VerdictResponse {
  accepted: boolean;
  current_estimate: number | null;
}

export interface StatsResponse {
  samples: number;
  reviewed: number;
  pooled_wer: number | null;
}

export class ApiError extends Error {
  constructor(public readonly status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

async function parseError(resp: Response): Promise<ApiError> {
  let detail = `${resp.status} ${resp.statusText}`;
  try {
    const body = await resp.json();
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    /* non-JSON error body; keep the status line */
  }
  return new ApiError(resp.status, detail);
}

export class ReviewApi {
  constructor(private readonly base: string = "") {}

  async getSamples(n = 8, excludeReviewed = false): Promise<BatchResponse> {
    const params = new URLSearchParams({ n: String(n) });
    if (excludeReviewed) params.set("exclude_reviewed", "true");
    const resp = await fetch(`${this.base}/api/samples?${params}`);
    if (!resp.ok) throw await parseError(resp);
    return resp.json();
  }

  async postVerdict(body: VerdictRequest): Promise<VerdictResponse> {
    const resp = await fetch(`${this.base}/api/verdict`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!resp.ok) throw await parseError(resp);
    return resp.json();
  }

  async getStats(): Promise<StatsResponse> {
    const resp = await fetch(`${this.base}/api/stats`);
    if (!resp.ok) throw await parseError(resp);
    return resp.json();
  }
}
