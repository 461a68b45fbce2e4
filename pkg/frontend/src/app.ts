import { ApiClient, ApiError } from "./api.js";
import { pollJob } from "./poll.js";
import type { AssessmentResponse, SampleCandidate } from "./types.js";
import {
  buildAssessmentView,
  decisionActions,
  escapeHtml,
  renderHistogram,
} from "./views/assessment.js";
import { buildSampleView, groupByCell, toCsv } from "./views/sample.js";
import { isValid, validateIntake } from "./views/intake.js";

const api = new ApiClient();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function showError(target: HTMLElement, err: unknown): void {
  const detail = err instanceof ApiError ? `${err.status}: ${err.message}` : String(err);
  target.innerHTML = `<p class="error">${escapeHtml(detail)}</p>`;
}

// --- red-flag checker -------------------------------------------------------

function wireChecker(): void {
  el<HTMLButtonElement>("check-button").addEventListener("click", async () => {
    const out = el("check-result");
    const text = el<HTMLTextAreaElement>("check-text").value;
    try {
      const result = await api.classify(text);
      const cls = result.flagged ? "verdict warning" : "verdict";
      out.innerHTML =
        `<p class="${cls}">${escapeHtml(result.predicted_level)}</p>` +
        (result.flagged ? `<p class="flag-message">${escapeHtml(result.message)}</p>` : "");
    } catch (err) {
      showError(out, err);
    }
  });
}

// --- source intake and crawl monitoring --------------------------------------

function wireIntake(): void {
  el<HTMLButtonElement>("intake-submit").addEventListener("click", async () => {
    const out = el("intake-result");
    const form = {
      domain: el<HTMLInputElement>("intake-domain").value,
      trustScore: el<HTMLInputElement>("intake-score").value,
      historyUrlTemplate: el<HTMLInputElement>("intake-template").value,
      articleLinkSelector: el<HTMLInputElement>("intake-selector").value,
    };
    const errors = validateIntake(form);
    for (const field of ["domain", "trustScore", "historyUrlTemplate", "articleLinkSelector"] as const) {
      el(`intake-error-${field}`).textContent = errors[field] ?? "";
    }
    if (!isValid(errors)) {
      return;
    }
    try {
      await api.addSource({
        domain: form.domain.trim().toLowerCase(),
        trust_score: Number(form.trustScore),
      });
      const { job_id } = await api.startCrawl(form.domain.trim().toLowerCase(), {
        history_url_template: form.historyUrlTemplate,
        article_link_selector: form.articleLinkSelector,
      });
      renderJobCard(job_id);
    } catch (err) {
      showError(out, err);
    }
  });
}

function renderJobCard(jobId: string): void {
  const card = document.createElement("div");
  card.className = "job-card";
  card.innerHTML =
    `<h3>job ${escapeHtml(jobId)}</h3><p class="job-state">queued</p>` +
    `<button class="job-cancel">cancel</button>`;
  el("job-list").appendChild(card);
  const state = card.querySelector(".job-state") as HTMLElement;
  card.querySelector(".job-cancel")!.addEventListener("click", () => {
    api.cancelJob(jobId).catch(() => undefined);
  });
  pollJob(api, jobId, (snapshot) => {
    state.textContent =
      `${snapshot.state} - pages ${snapshot.pages_fetched}, ` +
      `archived ${snapshot.archived}` +
      (snapshot.failure_reason ? ` (${snapshot.failure_reason})` : "");
  }).catch((err) => showError(state, err));
}

// --- assessment view ---------------------------------------------------------

let currentAssessment: AssessmentResponse | null = null;

function renderAssessment(assessment: AssessmentResponse): void {
  currentAssessment = assessment;
  const view = buildAssessmentView(assessment);
  const actions = decisionActions(view)
    .map((d) => `<button class="decide" data-decision="${d}">${d}</button>`)
    .join(" ");
  el("assessment-panel").innerHTML =
    `<h3>${escapeHtml(view.domain)}</h3>` +
    `<p class="inferred${view.inferredCoarse === "untrusted" ? " warning" : ""}">` +
    `${escapeHtml(view.inferredLevel)} (confidence ${view.confidenceLabel}, ` +
    `${view.nArticles} articles)</p>` +
    view.warnings.map((w) => `<p class="warning">${escapeHtml(w)}</p>`).join("") +
    `<h4>Articles per trust level</h4>${renderHistogram(view.levelRows)}` +
    `<h4>Articles per topic</h4>${renderHistogram(view.topicRows)}` +
    `<p>decision: <strong>${view.decision}</strong> ${actions}</p>`;
  for (const button of Array.from(
    el("assessment-panel").querySelectorAll(".decide"),
  )) {
    button.addEventListener("click", async () => {
      const decision = (button as HTMLElement).dataset.decision as
        | "escalate"
        | "dismiss";
      try {
        renderAssessment(await api.decide(view.domain, decision));
      } catch (err) {
        showError(el("assessment-panel"), err);
      }
    });
  }
}

function wireAssessment(): void {
  el<HTMLButtonElement>("assess-button").addEventListener("click", async () => {
    const domain = el<HTMLInputElement>("assess-domain").value.trim().toLowerCase();
    const texts = el<HTMLTextAreaElement>("assess-texts")
      .value.split(/\n{2,}/)
      .map((t) => t.trim())
      .filter(Boolean);
    try {
      renderAssessment(await api.assess(domain, texts));
    } catch (err) {
      showError(el("assessment-panel"), err);
    }
  });
}

// --- balanced sample picker --------------------------------------------------

function candidatesFromAssessment(a: AssessmentResponse): SampleCandidate[] {
  return a.predictions.map((p, i) => ({
    article_id: `${a.domain}#${i}`,
    level: p.level,
    topic: p.topic,
  }));
}

function wireSample(): void {
  el<HTMLButtonElement>("sample-button").addEventListener("click", async () => {
    const out = el("sample-panel");
    if (!currentAssessment) {
      out.textContent = "run an assessment first";
      return;
    }
    const n = Number(el<HTMLInputElement>("sample-n").value);
    const seed = Number(el<HTMLInputElement>("sample-seed").value);
    const candidates = candidatesFromAssessment(currentAssessment);
    try {
      const view = buildSampleView(
        await api.balancedSample(candidates, n, seed),
        candidates,
      );
      const groups = [...groupByCell(view)]
        .map(
          ([cell, rows]) =>
            `<h4>${escapeHtml(cell)}</h4><ul>` +
            rows.map((r) => `<li>${escapeHtml(r.articleId)}</li>`).join("") +
            "</ul>",
        )
        .join("");
      out.innerHTML =
        (view.truncated ? `<p class="warning">fewer candidates than requested</p>` : "") +
        groups;
      el<HTMLAnchorElement>("sample-export").href =
        "data:text/csv;charset=utf-8," + encodeURIComponent(toCsv(view));
    } catch (err) {
      showError(out, err);
    }
  });
}

export function main(): void {
  wireChecker();
  wireIntake();
  wireAssessment();
  wireSample();
}

if (typeof document !== "undefined") {
  main();
}
