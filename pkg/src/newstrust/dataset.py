"""Dataset assembly, distribution statistics, and stratified k-fold splits.

A dataset is an immutable, stably-ordered list of labeled articles plus a
label kind (5-level trust, 4-way topic, or the 2-way coarse trust remap).
Datasets persist as JSONL with a sidecar manifest; fold assignments persist
as JSON so every evaluation is replayable.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import registry
from .extractor import RawArticle
from .registry import (
    TOPICS,
    TRUST_LEVELS,
    Article,
    ArticleDraft,
    Source,
    coarsen_level,
    inherit_labels,
)

LABEL_KINDS = ("trust_level", "topic", "coarse_trust")


class BuildError(ValueError):
    """Article cannot be attached to a registered source."""


class StratificationError(ValueError):
    """A class has fewer members than the number of folds."""


@dataclass(frozen=True)
class Dataset:
    dataset_id: str
    created_at: datetime
    articles: tuple[Article, ...]
    label_kind: str

    def label_of(self, article: Article) -> str:
        if self.label_kind == "trust_level":
            return article.trust_level.name
        if self.label_kind == "topic":
            return article.topic.id
        return coarsen_level(article.trust_level)

    @property
    def classes(self) -> list[str]:
        """Declared class list for this label kind, in canonical order."""
        if self.label_kind == "trust_level":
            return [lv.name for lv in TRUST_LEVELS]
        if self.label_kind == "topic":
            return [t.id for t in TOPICS]
        return [registry.UNTRUSTED, registry.TRUSTED]

    def labels(self) -> list[str]:
        return [self.label_of(a) for a in self.articles]

    def texts(self) -> list[str]:
        return [a.text for a in self.articles]


@dataclass(frozen=True)
class FoldAssignment:
    k: int
    seed: int
    fold_of: dict[str, int]

    def to_dict(self) -> dict:
        return {"k": self.k, "seed": self.seed, "fold_of": self.fold_of}

    @classmethod
    def from_dict(cls, data: dict) -> "FoldAssignment":
        return cls(k=data["k"], seed=data["seed"], fold_of=dict(data["fold_of"]))


def build_dataset(
    articles: list[RawArticle],
    sources: list[Source],
    label_kind: str,
    dataset_id: str | None = None,
) -> Dataset:
    """Attach inherited labels to cleaned articles and fix a stable order
    (source domain, then URL)."""
    if label_kind not in LABEL_KINDS:
        raise ValueError(f"unknown label kind {label_kind!r}")
    by_domain = {s.domain: s for s in sources}
    labeled: list[Article] = []
    for raw in articles:
        source = by_domain.get(raw.domain)
        if source is None:
            raise BuildError(f"article from unregistered domain {raw.domain!r}")
        draft = ArticleDraft(
            article_id=hashlib.sha256(raw.url.encode()).hexdigest()[:16],
            source_domain=raw.domain,
            url=raw.url,
            text=raw.text,
            word_count=raw.word_count,
            fetched_at=raw.fetched_at,
        )
        labeled.append(inherit_labels(draft, source))
    labeled.sort(key=lambda a: (a.source_domain, a.url))
    if dataset_id is None:
        digest = hashlib.sha256(
            "\n".join(a.article_id for a in labeled).encode()
        ).hexdigest()[:12]
        dataset_id = f"{label_kind}-{digest}"
    return Dataset(
        dataset_id=dataset_id,
        created_at=datetime.now(timezone.utc),
        articles=tuple(labeled),
        label_kind=label_kind,
    )


def stats(dataset: Dataset) -> dict:
    """Cross-tabulation of articles and sources per (trust level, topic),
    with row and column totals."""
    cells = {
        (lv.name, t.id): 0 for lv in TRUST_LEVELS for t in TOPICS
    }
    cell_sources: dict[tuple[str, str], set[str]] = {
        key: set() for key in cells
    }
    for a in dataset.articles:
        key = (a.trust_level.name, a.topic.id)
        cells[key] += 1
        cell_sources[key].add(a.source_domain)
    row_totals = {
        lv.name: sum(cells[(lv.name, t.id)] for t in TOPICS) for lv in TRUST_LEVELS
    }
    col_totals = {
        t.id: sum(cells[(lv.name, t.id)] for lv in TRUST_LEVELS) for t in TOPICS
    }
    return {
        "articles": {f"{lv}|{t}": n for (lv, t), n in cells.items()},
        "sources": {f"{lv}|{t}": len(s) for (lv, t), s in cell_sources.items()},
        "row_totals": row_totals,
        "col_totals": col_totals,
        "total": len(dataset.articles),
    }


def format_stats_table(table: dict) -> str:
    """Plain-text level x topic article counts."""
    topics = [t.id for t in TOPICS]
    width = max(len(lv.name) for lv in TRUST_LEVELS) + 2
    lines = [" " * width + "  ".join(f"{t:>12}" for t in topics) + f"{'total':>12}"]
    for lv in TRUST_LEVELS:
        row = [table["articles"][f"{lv.name}|{t}"] for t in topics]
        lines.append(
            f"{lv.name:<{width}}"
            + "  ".join(f"{n:>12}" for n in row)
            + f"{table['row_totals'][lv.name]:>12}"
        )
    lines.append(
        f"{'total':<{width}}"
        + "  ".join(f"{table['col_totals'][t]:>12}" for t in topics)
        + f"{table['total']:>12}"
    )
    return "\n".join(lines)


def stratified_kfold(dataset: Dataset, k: int, seed: int) -> FoldAssignment:
    """Per class: seeded shuffle, then round-robin dealing to k folds.

    Guarantees every (class, fold) count is floor(n_c/k) or ceil(n_c/k).
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    by_class: dict[str, list[str]] = {}
    for a in dataset.articles:
        by_class.setdefault(dataset.label_of(a), []).append(a.article_id)
    rng = random.Random(seed)
    fold_of: dict[str, int] = {}
    for cls in sorted(by_class):
        ids = by_class[cls]
        if len(ids) < k:
            raise StratificationError(
                f"class {cls!r} has {len(ids)} members, fewer than k={k}"
            )
        rng.shuffle(ids)
        for i, article_id in enumerate(ids):
            fold_of[article_id] = i % k
    return FoldAssignment(k=k, seed=seed, fold_of=fold_of)


def fold_slices(
    dataset: Dataset, assignment: FoldAssignment, fold: int
) -> tuple[list[Article], list[Article]]:
    """(train, test) for one fold: test = members of the fold, train = rest."""
    if not 0 <= fold < assignment.k:
        raise IndexError(f"fold {fold} out of range [0, {assignment.k})")
    train, test = [], []
    for a in dataset.articles:
        (test if assignment.fold_of[a.article_id] == fold else train).append(a)
    return train, test


def _article_to_dict(a: Article) -> dict:
    return {
        "article_id": a.article_id,
        "source_domain": a.source_domain,
        "url": a.url,
        "text": a.text,
        "word_count": a.word_count,
        "trust_level": a.trust_level.name,
        "topic": a.topic.id,
        "fetched_at": a.fetched_at.isoformat(),
    }


def _article_from_dict(d: dict) -> Article:
    return Article(
        article_id=d["article_id"],
        source_domain=d["source_domain"],
        url=d["url"],
        text=d["text"],
        word_count=d["word_count"],
        trust_level=registry.level_by_name(d["trust_level"]),
        topic=registry.topic_by_id(d["topic"]),
        fetched_at=datetime.fromisoformat(d["fetched_at"]),
    )


def save_dataset(dataset: Dataset, out_dir) -> Path:
    """Write articles.jsonl plus manifest.json into out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    jsonl = out_dir / "articles.jsonl"
    with open(jsonl, "w", encoding="utf-8") as fh:
        for a in dataset.articles:
            fh.write(json.dumps(_article_to_dict(a), ensure_ascii=False) + "\n")
    counts: dict[str, int] = {}
    for label in dataset.labels():
        counts[label] = counts.get(label, 0) + 1
    manifest = {
        "dataset_id": dataset.dataset_id,
        "created_at": dataset.created_at.isoformat(),
        "label_kind": dataset.label_kind,
        "n_articles": len(dataset.articles),
        "label_counts": counts,
        "articles_sha256": hashlib.sha256(jsonl.read_bytes()).hexdigest(),
    }
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return out_dir


def load_dataset(in_dir) -> Dataset:
    in_dir = Path(in_dir)
    with open(in_dir / "manifest.json", encoding="utf-8") as fh:
        manifest = json.load(fh)
    articles = []
    with open(in_dir / "articles.jsonl", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                articles.append(_article_from_dict(json.loads(line)))
    return Dataset(
        dataset_id=manifest["dataset_id"],
        created_at=datetime.fromisoformat(manifest["created_at"]),
        articles=tuple(articles),
        label_kind=manifest["label_kind"],
    )


def save_folds(assignment: FoldAssignment, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(assignment.to_dict(), fh)
        fh.write("\n")


def load_folds(path) -> FoldAssignment:
    with open(path, encoding="utf-8") as fh:
        return FoldAssignment.from_dict(json.load(fh))
