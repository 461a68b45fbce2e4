/** Response shapes of the /v1 API. The dashboard never computes these
 * values itself; every displayed number comes from one of these fields. */

export const TRUST_LEVEL_NAMES = [
  "Proceed with Maximum Caution",
  "Proceed with Caution",
  "Credible with Exceptions",
  "Generally Credible",
  "High Credibility",
] as const;

export type TrustLevelName = (typeof TRUST_LEVEL_NAMES)[number];

export const TOPIC_IDS = ["political", "conspiracy", "sports", "health"] as const;

export type TopicId = (typeof TOPIC_IDS)[number];

/** Bins at these indices carry the red-flag warning color. */
export const FLAGGED_LEVEL_INDICES = [0, 1] as const;

export interface ClassifyResponse {
  predicted_level: string;
  probabilities: Record<string, number>;
  flagged: boolean;
  message: string;
}

export interface SourceRecord {
  domain: string;
  trust_score: number;
  trust_level: string;
  topic: string;
  admitted?: boolean;
}

export type JobState =
  | "queued"
  | "enumerating"
  | "fetching"
  | "done"
  | "failed"
  | "cancelled";

export const TERMINAL_JOB_STATES: readonly JobState[] = ["done", "failed", "cancelled"];

export interface JobSnapshot {
  job_id: string;
  domain: string;
  state: JobState;
  urls_found: number;
  pages_fetched: number;
  archived: number;
  errors: [string, string][];
  warc_path: string | null;
  started_at: string | null;
  finished_at: string | null;
  failure_reason: string | null;
}

export interface ArticlePrediction {
  level: string;
  topic: string;
}

export type Decision = "pending" | "escalate" | "dismiss";

export interface AssessmentResponse {
  domain: string;
  n_articles: number;
  level_histogram: Record<string, number>;
  topic_histogram: Record<string, number>;
  inferred_level: string;
  inferred_coarse: "untrusted" | "trusted";
  confidence: number;
  model_id: string;
  created_at: string;
  warnings: string[];
  predictions: ArticlePrediction[];
  decision: Decision;
}

export interface SampleCandidate {
  article_id: string;
  level: string;
  topic: string;
  url?: string;
}

export interface BalancedSampleResponse {
  article_ids: string[];
  truncated: boolean;
}

export interface ModelInfo {
  model_id: string;
  classes: string[];
}
