"""HTTP service and aggregation logic for the three triage applications:
per-article red-flag classification, source-level assessment from article
aggregation, and balanced sample selection for manual annotation.

Everything persists in a single on-disk workspace directory (registry JSON,
WARC archives, datasets, model files, an append-only job journal); there is
no external database. The API is versioned under /v1 and responses carry
model/dataset provenance where applicable.
"""

from __future__ import annotations

import json
import random
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from . import classifier, crawler, dataset as dataset_mod, evaluation, registry
from .classifier import Model, NativeBackend, TrainConfig, predict_proba
from .crawler import CrawlConfig, CrawlJob, run_crawl
from .registry import (
    TOPICS,
    TRUST_LEVELS,
    Source,
    TrustLevel,
    coarsen_level,
    source_from_dict,
    source_to_dict,
)

FLAG_MESSAGE = (
    "The article you are reading is similar to those produced by "
    "untrustworthy newspapers. Supplement your reading with other readings "
    "of articles produced by trustworthy newspapers."
)

MIN_ASSESSMENT_ARTICLES = 40  # below this, assessments carry a warning


@dataclass(frozen=True)
class RedFlagResult:
    predicted_level: str
    probabilities: dict[str, float]
    flagged: bool
    message: str

    def to_dict(self) -> dict:
        return {
            "predicted_level": self.predicted_level,
            "probabilities": self.probabilities,
            "flagged": self.flagged,
            "message": self.message,
        }


@dataclass(frozen=True)
class SourceAssessment:
    domain: str
    n_articles: int
    level_histogram: dict[str, int]
    topic_histogram: dict[str, int]
    inferred_level: str
    inferred_coarse: str
    confidence: float
    model_id: str
    created_at: datetime
    warnings: tuple[str, ...] = ()
    predictions: tuple[dict, ...] = ()

    def to_dict(self) -> dict:
        return {
            "domain": self.domain,
            "n_articles": self.n_articles,
            "level_histogram": self.level_histogram,
            "topic_histogram": self.topic_histogram,
            "inferred_level": self.inferred_level,
            "inferred_coarse": self.inferred_coarse,
            "confidence": self.confidence,
            "model_id": self.model_id,
            "created_at": self.created_at.isoformat(),
            "warnings": list(self.warnings),
            "predictions": list(self.predictions),
        }


def classify_article(text: str, model: Model) -> RedFlagResult:
    """Red-flag check: flag any article whose predicted level sits in the
    two lowest trust bins."""
    if not text or not text.strip():
        raise ValueError("text must be non-empty")
    probs = predict_proba(model, text)
    idx = int(np.argmax(probs))
    level_name = model.classes[idx]
    level = registry.level_by_name(level_name)
    flagged = level.index <= 1
    return RedFlagResult(
        predicted_level=level_name,
        probabilities={c: float(p) for c, p in zip(model.classes, probs)},
        flagged=flagged,
        message=FLAG_MESSAGE if flagged else "",
    )


def assess_source(
    domain: str,
    texts: Sequence[str],
    trust_model: Model,
    topic_model: Model,
    model_id: str = "",
) -> SourceAssessment:
    """Classify each article with both models and aggregate: the inferred
    level is the plurality of predicted levels, ties broken toward the
    lower trust index."""
    if not texts:
        raise ValueError("at least one article text is required")
    level_hist = {lv.name: 0 for lv in TRUST_LEVELS}
    topic_hist = {t.id: 0 for t in TOPICS}
    predictions = []
    for text in texts:
        level_probs = predict_proba(trust_model, text)
        topic_probs = predict_proba(topic_model, text)
        level_name = trust_model.classes[int(np.argmax(level_probs))]
        topic_id = topic_model.classes[int(np.argmax(topic_probs))]
        level_hist[level_name] += 1
        topic_hist[topic_id] += 1
        predictions.append({"level": level_name, "topic": topic_id})

    best = max(
        TRUST_LEVELS, key=lambda lv: (level_hist[lv.name], -lv.index)
    )
    warnings = ()
    if len(texts) < MIN_ASSESSMENT_ARTICLES:
        warnings = (
            f"only {len(texts)} articles; assessments below "
            f"{MIN_ASSESSMENT_ARTICLES} articles are indicative only",
        )
    return SourceAssessment(
        domain=domain,
        n_articles=len(texts),
        level_histogram=level_hist,
        topic_histogram=topic_hist,
        inferred_level=best.name,
        inferred_coarse=coarsen_level(best),
        confidence=level_hist[best.name] / len(texts),
        model_id=model_id,
        created_at=datetime.now(timezone.utc),
        warnings=warnings,
        predictions=tuple(predictions),
    )


@dataclass(frozen=True)
class BalancedSampleRequest:
    candidates: tuple[dict, ...]  # each: {article_id, level, topic}
    n: int
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")


def balanced_sample(request: BalancedSampleRequest) -> tuple[list[str], bool]:
    """Draw up to n article ids spread evenly over (level, topic) cells.

    Round-robin over non-empty cells in (level index, topic id) order,
    drawing uniformly without replacement within a cell. Returns
    (ids, truncated): truncated is True when fewer than n candidates exist.
    """
    level_index = {lv.name: lv.index for lv in TRUST_LEVELS}
    cells: dict[tuple[int, str], list[str]] = {}
    for cand in request.candidates:
        key = (level_index[cand["level"]], cand["topic"])
        cells.setdefault(key, []).append(cand["article_id"])
    rng = random.Random(request.seed)
    order = sorted(cells)
    for key in order:
        cells[key] = sorted(cells[key])
        rng.shuffle(cells[key])
    chosen: list[str] = []
    while len(chosen) < request.n and any(cells[k] for k in order):
        for key in order:
            if cells[key] and len(chosen) < request.n:
                chosen.append(cells[key].pop())
    truncated = len(chosen) < request.n
    return chosen, truncated


# ---------------------------------------------------------------------------
# Workspace and jobs


class Workspace:
    """On-disk state shared by the service: registry, models, archives,
    datasets, reports, assessments, and the append-only job journal."""

    def __init__(self, root):
        self.root = Path(root)
        for sub in ("archives", "models", "datasets", "reports"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        self.registry_path = self.root / "registry.json"
        self.journal_path = self.root / "journal.jsonl"
        self.assessments_path = self.root / "assessments.json"
        self._lock = threading.Lock()
        self._models: dict[str, Model] = {}

    def load_sources(self) -> list[Source]:
        if not self.registry_path.exists():
            return []
        return registry.load_registry(self.registry_path)

    def add_source(self, source: Source) -> None:
        with self._lock:
            sources = [s for s in self.load_sources() if s.domain != source.domain]
            sources.append(source)
            sources.sort(key=lambda s: s.domain)
            registry.save_registry(sources, self.registry_path)

    def journal(self, event: dict) -> None:
        with self._lock:
            with open(self.journal_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(event) + "\n")

    def model_ids(self) -> list[str]:
        return sorted(p.stem for p in (self.root / "models").glob("*.json"))

    def load_model(self, model_id: str) -> Model:
        if model_id not in self._models:
            path = self.root / "models" / f"{model_id}.json"
            if not path.exists():
                raise KeyError(model_id)
            self._models[model_id] = classifier.load_model(path)
        return self._models[model_id]

    def save_assessment(self, domain: str, record: dict) -> None:
        with self._lock:
            data = {}
            if self.assessments_path.exists():
                data = json.loads(self.assessments_path.read_text())
            data[domain] = record
            self.assessments_path.write_text(json.dumps(data, indent=2))

    def get_assessment(self, domain: str) -> Optional[dict]:
        if not self.assessments_path.exists():
            return None
        return json.loads(self.assessments_path.read_text()).get(domain)


@dataclass
class EvalJob:
    job_id: str
    state: str = "queued"
    result: Optional[dict] = None
    error: Optional[str] = None


class JobManager:
    def __init__(self, workspace: Workspace, max_workers: int = 4):
        self.workspace = workspace
        self.executor = ThreadPoolExecutor(max_workers=max_workers)
        self.crawl_jobs: dict[str, CrawlJob] = {}
        self.eval_jobs: dict[str, EvalJob] = {}

    def submit_crawl(self, config: CrawlConfig) -> CrawlJob:
        job = CrawlJob(job_id=uuid.uuid4().hex[:12], domain=config.domain)
        self.crawl_jobs[job.job_id] = job
        self.workspace.journal(
            {"event": "crawl-submitted", "job_id": job.job_id, "domain": config.domain}
        )

        def _run():
            try:
                run_crawl(config, self.workspace.root / "archives", job)
            except Exception as exc:  # job-level config failures
                job.failure_reason = str(exc)
                try:
                    job.transition("failed")
                except ValueError:
                    pass
            self.workspace.journal(
                {"event": "crawl-finished", "job_id": job.job_id, "state": job.state}
            )

        self.executor.submit(_run)
        return job

    def submit_evaluation(self, spec: dict) -> EvalJob:
        job = EvalJob(job_id=uuid.uuid4().hex[:12])
        self.eval_jobs[job.job_id] = job

        def _run():
            job.state = "running"
            try:
                ds = dataset_mod.load_dataset(spec["dataset_dir"])
                folds = dataset_mod.stratified_kfold(
                    ds, spec.get("k", 10), spec.get("seed", 0)
                )
                train_config = TrainConfig(
                    epochs=spec.get("epochs", 10), seed=spec.get("seed", 0)
                )
                summary = evaluation.cross_validate(
                    ds, folds, lambda classes: NativeBackend(classes, train_config)
                )
                out = self.workspace.root / "reports" / job.job_id
                evaluation.write_report(summary, out)
                job.result = {
                    "dataset_id": ds.dataset_id,
                    "report_dir": str(out),
                    "f1_micro": summary.f1_micro,
                    "f1_macro": summary.f1_macro,
                }
                job.state = "done"
            except Exception as exc:
                job.error = str(exc)
                job.state = "failed"

        self.executor.submit(_run)
        return job


# ---------------------------------------------------------------------------
# HTTP API


def create_app(workspace_dir, max_workers: int = 4) -> FastAPI:
    ws = Workspace(workspace_dir)
    jobs = JobManager(ws, max_workers=max_workers)
    app = FastAPI(title="newstrust", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.workspace = ws
    app.state.jobs = jobs

    def _model_or_400(model_id: Optional[str], kind: str) -> tuple[str, Model]:
        candidates = ws.model_ids()
        if model_id is None:
            matching = [m for m in candidates if kind in m]
            if not matching:
                raise HTTPException(503, f"no {kind} model available")
            model_id = matching[-1]
        try:
            return model_id, ws.load_model(model_id)
        except KeyError:
            raise HTTPException(404, f"unknown model {model_id!r}") from None

    @app.post("/v1/classify")
    def classify(body: dict):
        text = body.get("text", "")
        if not isinstance(text, str) or not text.strip():
            raise HTTPException(400, "text must be a non-empty string")
        model_id, model = _model_or_400(body.get("model_id"), "trust")
        result = classify_article(text, model)
        return {**result.to_dict(), "model_id": model_id}

    @app.get("/v1/sources")
    def list_sources():
        return [source_to_dict(s) for s in ws.load_sources()]

    @app.post("/v1/sources")
    def add_source(body: dict):
        try:
            source = source_from_dict(body)
        except registry.ValidationError as exc:
            raise HTTPException(400, str(exc)) from None
        ws.add_source(source)
        admission = registry.admit_source(source)
        return {
            **source_to_dict(source),
            "admitted": admission.accepted,
            "rejection_reason": admission.reason,
        }

    @app.post("/v1/sources/{domain}/crawl")
    def start_crawl(domain: str, body: dict):
        body = dict(body or {})
        body["domain"] = domain
        try:
            config = CrawlConfig.from_dict(body)
        except (crawler.ConfigError, TypeError) as exc:
            raise HTTPException(400, str(exc)) from None
        job = jobs.submit_crawl(config)
        return {"job_id": job.job_id, "state": job.state}

    @app.get("/v1/jobs/{job_id}")
    def get_job(job_id: str):
        job = jobs.crawl_jobs.get(job_id)
        if job is None:
            raise HTTPException(404, f"unknown job {job_id!r}")
        return job.snapshot()

    @app.post("/v1/jobs/{job_id}/cancel")
    def cancel_job(job_id: str):
        job = jobs.crawl_jobs.get(job_id)
        if job is None:
            raise HTTPException(404, f"unknown job {job_id!r}")
        if job.state in ("done", "failed", "cancelled"):
            raise HTTPException(409, f"job already {job.state}")
        job.cancel()
        return {"job_id": job.job_id, "cancel_requested": True}

    @app.post("/v1/sources/{domain}/assess")
    def assess(domain: str, body: dict):
        decision = body.get("decision")
        if decision is not None:
            stored = ws.get_assessment(domain)
            if stored is None:
                raise HTTPException(404, f"no assessment stored for {domain!r}")
            if decision not in ("escalate", "dismiss"):
                raise HTTPException(400, "decision must be escalate or dismiss")
            if stored.get("decision") not in (None, "pending"):
                raise HTTPException(409, "decision already recorded")
            stored["decision"] = decision
            ws.save_assessment(domain, stored)
            return stored
        texts = body.get("texts")
        if not texts:
            raise HTTPException(400, "texts must be a non-empty array")
        trust_id, trust_model = _model_or_400(body.get("trust_model_id"), "trust")
        topic_id, topic_model = _model_or_400(body.get("topic_model_id"), "topic")
        assessment = assess_source(
            domain, texts, trust_model, topic_model, model_id=trust_id
        )
        record = {
            **assessment.to_dict(),
            "topic_model_id": topic_id,
            "decision": "pending",
        }
        ws.save_assessment(domain, record)
        return record

    @app.post("/v1/samples/balanced")
    def sample_balanced(body: dict):
        try:
            request = BalancedSampleRequest(
                candidates=tuple(body["candidates"]),
                n=body["n"],
                seed=body.get("seed", 0),
            )
            ids, truncated = balanced_sample(request)
        except (KeyError, ValueError) as exc:
            raise HTTPException(400, f"bad sample request: {exc}") from None
        return {"article_ids": ids, "truncated": truncated, "seed": request.seed}

    @app.get("/v1/models")
    def list_models():
        out = []
        for model_id in ws.model_ids():
            model = ws.load_model(model_id)
            out.append(
                {"model_id": model_id, "classes": model.classes, "dim": model.featurizer.dim}
            )
        return out

    @app.post("/v1/evaluations")
    def start_evaluation(body: dict):
        if "dataset_dir" not in body:
            raise HTTPException(400, "dataset_dir is required")
        job = jobs.submit_evaluation(body)
        return {"job_id": job.job_id, "state": job.state}

    @app.get("/v1/evaluations/{job_id}")
    def get_evaluation(job_id: str):
        job = jobs.eval_jobs.get(job_id)
        if job is None:
            raise HTTPException(404, f"unknown evaluation {job_id!r}")
        return {
            "job_id": job.job_id,
            "state": job.state,
            "result": job.result,
            "error": job.error,
        }

    return app
