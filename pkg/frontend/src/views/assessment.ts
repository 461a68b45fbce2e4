import {
  FLAGGED_LEVEL_INDICES,
  TOPIC_IDS,
  TRUST_LEVEL_NAMES,
  type AssessmentResponse,
  type Decision,
} from "../types.js";

export interface HistogramRow {
  label: string;
  count: number;
  flagged: boolean;
}

/** Everything the assessment panel renders. Each field is copied verbatim
 * from the API response; the only transformations are ordering the bins
 * and formatting the confidence, never arithmetic on the counts. */
export interface AssessmentView {
  domain: string;
  inferredLevel: string;
  inferredCoarse: string;
  confidenceLabel: string;
  nArticles: number;
  levelRows: HistogramRow[];
  topicRows: HistogramRow[];
  decision: Decision;
  warnings: string[];
  predictions: { level: string; topic: string }[];
}

export function buildAssessmentView(a: AssessmentResponse): AssessmentView {
  const levelRows = TRUST_LEVEL_NAMES.map((name, index) => ({
    label: name,
    count: a.level_histogram[name] ?? 0,
    flagged: FLAGGED_LEVEL_INDICES.includes(index as 0 | 1),
  }));
  const topicRows = TOPIC_IDS.map((id) => ({
    label: id,
    count: a.topic_histogram[id] ?? 0,
    flagged: false,
  }));
  return {
    domain: a.domain,
    inferredLevel: a.inferred_level,
    inferredCoarse: a.inferred_coarse,
    confidenceLabel: a.confidence.toFixed(2),
    nArticles: a.n_articles,
    levelRows,
    topicRows,
    decision: a.decision,
    warnings: a.warnings,
    predictions: a.predictions.map((p) => ({ level: p.level, topic: p.topic })),
  };
}

/** Decision buttons are offered only while the assessment is pending. */
export function decisionActions(view: AssessmentView): ("escalate" | "dismiss")[] {
  return view.decision === "pending" ? ["escalate", "dismiss"] : [];
}

export function renderHistogram(rows: HistogramRow[], maxBarWidth = 40): string {
  const peak = Math.max(1, ...rows.map((r) => r.count));
  return rows
    .map((row) => {
      const width = Math.round((row.count / peak) * maxBarWidth);
      const cls = row.flagged ? "bar flagged" : "bar";
      return (
        `<div class="histogram-row${row.flagged ? " warning" : ""}">` +
        `<span class="label">${escapeHtml(row.label)}</span>` +
        `<span class="${cls}" style="width:${width}px"></span>` +
        `<span class="count">${row.count}</span></div>`
      );
    })
    .join("\n");
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
