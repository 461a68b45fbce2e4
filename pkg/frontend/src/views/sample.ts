import type { BalancedSampleResponse, SampleCandidate } from "../types.js";

export interface SampleRow {
  articleId: string;
  url: string;
  level: string;
  topic: string;
}

export interface SampleView {
  rows: SampleRow[];
  truncated: boolean;
}

/** Join the drawn ids back to their candidate metadata, preserving the
 * API's response order exactly (the export must match it). */
export function buildSampleView(
  response: BalancedSampleResponse,
  candidates: SampleCandidate[],
): SampleView {
  const byId = new Map(candidates.map((c) => [c.article_id, c]));
  const rows = response.article_ids.map((articleId) => {
    const candidate = byId.get(articleId);
    if (!candidate) {
      throw new Error(`sample returned unknown article id ${articleId}`);
    }
    return {
      articleId,
      url: candidate.url ?? "",
      level: candidate.level,
      topic: candidate.topic,
    };
  });
  return { rows, truncated: response.truncated };
}

/** Rows grouped by (level, topic) cell for display; group order follows
 * first appearance in the API response. */
export function groupByCell(view: SampleView): Map<string, SampleRow[]> {
  const groups = new Map<string, SampleRow[]>();
  for (const row of view.rows) {
    const key = `${row.level} / ${row.topic}`;
    const bucket = groups.get(key);
    if (bucket) {
      bucket.push(row);
    } else {
      groups.set(key, [row]);
    }
  }
  return groups;
}

function csvField(value: string): string {
  return /[",\n]/.test(value) ? `"${value.replace(/"/g, '""')}"` : value;
}

/** CSV export: header plus one row per sampled article, in API order. */
export function toCsv(view: SampleView): string {
  const lines = ["article_id,url,level,topic"];
  for (const row of view.rows) {
    lines.push(
      [row.articleId, row.url, row.level, row.topic].map(csvField).join(","),
    );
  }
  return lines.join("\n") + "\n";
}
