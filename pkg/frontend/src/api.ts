import type {
  AssessmentResponse,
  BalancedSampleResponse,
  ClassifyResponse,
  Decision,
  JobSnapshot,
  ModelInfo,
  SampleCandidate,
  SourceRecord,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

async function request<T>(
  base: string,
  path: string,
  init?: RequestInit,
): Promise<T> {
  const resp = await fetch(base + path, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  const body = await resp.json().catch(() => ({}));
  if (!resp.ok) {
    throw new ApiError(resp.status, body?.detail ?? resp.statusText);
  }
  return body as T;
}

/** Thin typed client over the /v1 API. All dashboard data flows through
 * here; the client adds no interpretation of its own. */
export class ApiClient {
  constructor(private base = "") {}

  classify(text: string, modelId?: string): Promise<ClassifyResponse> {
    return request(this.base, "/v1/classify", {
      method: "POST",
      body: JSON.stringify({ text, ...(modelId ? { model_id: modelId } : {}) }),
    });
  }

  listSources(): Promise<SourceRecord[]> {
    return request(this.base, "/v1/sources");
  }

  addSource(source: {
    domain: string;
    trust_score: number;
    topic?: string;
  }): Promise<SourceRecord> {
    return request(this.base, "/v1/sources", {
      method: "POST",
      body: JSON.stringify(source),
    });
  }

  startCrawl(
    domain: string,
    config: Record<string, unknown>,
  ): Promise<{ job_id: string; state: string }> {
    return request(this.base, `/v1/sources/${encodeURIComponent(domain)}/crawl`, {
      method: "POST",
      body: JSON.stringify(config),
    });
  }

  getJob(jobId: string): Promise<JobSnapshot> {
    return request(this.base, `/v1/jobs/${encodeURIComponent(jobId)}`);
  }

  cancelJob(jobId: string): Promise<{ job_id: string; cancel_requested: boolean }> {
    return request(this.base, `/v1/jobs/${encodeURIComponent(jobId)}/cancel`, {
      method: "POST",
    });
  }

  assess(domain: string, texts: string[]): Promise<AssessmentResponse> {
    return request(this.base, `/v1/sources/${encodeURIComponent(domain)}/assess`, {
      method: "POST",
      body: JSON.stringify({ texts }),
    });
  }

  decide(
    domain: string,
    decision: Exclude<Decision, "pending">,
  ): Promise<AssessmentResponse> {
    return request(this.base, `/v1/sources/${encodeURIComponent(domain)}/assess`, {
      method: "POST",
      body: JSON.stringify({ decision }),
    });
  }

  balancedSample(
    candidates: SampleCandidate[],
    n: number,
    seed: number,
  ): Promise<BalancedSampleResponse> {
    return request(this.base, "/v1/samples/balanced", {
      method: "POST",
      body: JSON.stringify({ candidates, n, seed }),
    });
  }

  listModels(): Promise<ModelInfo[]> {
    return request(this.base, "/v1/models");
  }
}
