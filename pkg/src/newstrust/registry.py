"""Domain model: sources, articles, the ordinal trust-level taxonomy, the
topic taxonomy, and label inheritance.

Trust scores are integers in [0, 100]. The five ordinal levels partition
that range; a two-way "coarse" view splits at 59/60 into untrusted vs
trusted publishers. Registry data is immutable after load and safe to share
across workers.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Iterable, Optional

UNTRUSTED = "untrusted"
TRUSTED = "trusted"


class ValidationError(ValueError):
    """Raised for out-of-range scores, malformed domains, bad input records."""


class LabelingError(ValueError):
    """Raised when an article draft does not belong to the given source."""


@dataclass(frozen=True, order=True)
class TrustLevel:
    index: int
    name: str = field(compare=False)
    score_lo: int = field(compare=False)
    score_hi: int = field(compare=False)


@dataclass(frozen=True)
class Topic:
    id: str
    display_name: str


TRUST_LEVELS: tuple[TrustLevel, ...] = (
    TrustLevel(0, "Proceed with Maximum Caution", 0, 39),
    TrustLevel(1, "Proceed with Caution", 40, 59),
    TrustLevel(2, "Credible with Exceptions", 60, 74),
    TrustLevel(3, "Generally Credible", 75, 99),
    TrustLevel(4, "High Credibility", 100, 100),
)

TOPICS: tuple[Topic, ...] = (
    Topic("political", "Political news or commentary"),
    Topic("conspiracy", "Conspiracy theories or hoaxes"),
    Topic("sports", "Sports and athletics"),
    Topic("health", "Health or medical information"),
)

_TOPIC_BY_ID = {t.id: t for t in TOPICS}
_LEVEL_BY_NAME = {lv.name: lv for lv in TRUST_LEVELS}

# RFC 1123-ish hostname: dot-separated alphanumeric labels, hyphens inside.
_DOMAIN_RE = re.compile(
    r"^(?=.{1,253}$)([a-z0-9]([a-z0-9-]{0,61}[a-z0-9])?\.)+[a-z]{2,63}$",
    re.IGNORECASE,
)


def topic_by_id(topic_id: str) -> Topic:
    try:
        return _TOPIC_BY_ID[topic_id]
    except KeyError:
        raise ValidationError(f"unknown topic id: {topic_id!r}") from None


def level_by_name(name: str) -> TrustLevel:
    try:
        return _LEVEL_BY_NAME[name]
    except KeyError:
        raise ValidationError(f"unknown trust level name: {name!r}") from None


def _check_score(score: int) -> int:
    if isinstance(score, bool) or not isinstance(score, int):
        raise ValidationError(f"trust score must be an integer, got {score!r}")
    if not 0 <= score <= 100:
        raise ValidationError(f"trust score out of range [0, 100]: {score}")
    return score


def level_from_score(score: int) -> TrustLevel:
    """Map an integer trust score to its unique ordinal level."""
    _check_score(score)
    for level in TRUST_LEVELS:
        if level.score_lo <= score <= level.score_hi:
            return level
    raise AssertionError("levels partition [0, 100]")  # pragma: no cover


def coarse_level_from_score(score: int) -> str:
    """Two-way split: scores 0-59 are untrusted, 60-100 trusted."""
    _check_score(score)
    return UNTRUSTED if score <= 59 else TRUSTED


def coarsen_level(level: TrustLevel) -> str:
    """Collapse the five ordinal levels into untrusted (0-1) / trusted (2-4)."""
    return UNTRUSTED if level.index <= 1 else TRUSTED


@dataclass(frozen=True)
class Source:
    domain: str
    trust_score: int
    topic: Topic
    language: str = "en"
    paywalled: bool = False
    crawl_config_id: Optional[str] = None

    def __post_init__(self) -> None:
        if not _DOMAIN_RE.match(self.domain):
            raise ValidationError(f"malformed domain: {self.domain!r}")
        _check_score(self.trust_score)

    @property
    def trust_level(self) -> TrustLevel:
        return level_from_score(self.trust_score)


@dataclass(frozen=True)
class ArticleDraft:
    """Extracted article text before labels are attached."""

    article_id: str
    source_domain: str
    url: str
    text: str
    word_count: int
    fetched_at: datetime


@dataclass(frozen=True)
class Article:
    article_id: str
    source_domain: str
    url: str
    text: str
    word_count: int
    trust_level: TrustLevel
    topic: Topic
    fetched_at: datetime


@dataclass(frozen=True)
class Admission:
    accepted: bool
    reason: Optional[str] = None


def admit_source(source: Source) -> Admission:
    """Apply the selection exclusions: paywalled sources and non-English
    sources are rejected."""
    if source.paywalled:
        return Admission(False, "paywall")
    lang = source.language.lower()
    if lang != "en" and not lang.startswith("en-"):
        return Admission(False, "language")
    return Admission(True)


def inherit_labels(draft: ArticleDraft, source: Source) -> Article:
    """Attach the source's trust level and topic to an article draft."""
    if draft.source_domain != source.domain:
        raise LabelingError(
            f"draft domain {draft.source_domain!r} does not match "
            f"source {source.domain!r}"
        )
    return Article(
        article_id=draft.article_id,
        source_domain=draft.source_domain,
        url=draft.url,
        text=draft.text,
        word_count=draft.word_count,
        trust_level=source.trust_level,
        topic=source.topic,
        fetched_at=draft.fetched_at,
    )


def source_from_dict(record: dict) -> Source:
    """Build a Source from a registry-file record. trust_level on input is
    ignored (always derived from trust_score)."""
    try:
        topic = record["topic"]
    except KeyError:
        raise ValidationError("source record missing 'topic'") from None
    if isinstance(topic, dict):
        topic = topic.get("id")
    return Source(
        domain=record.get("domain", ""),
        trust_score=record.get("trust_score", -1),
        topic=topic_by_id(topic),
        language=record.get("language", "en"),
        paywalled=bool(record.get("paywalled", False)),
        crawl_config_id=record.get("crawl_config_id"),
    )


def source_to_dict(source: Source) -> dict:
    return {
        "domain": source.domain,
        "trust_score": source.trust_score,
        "trust_level": source.trust_level.name,
        "topic": source.topic.id,
        "language": source.language,
        "paywalled": source.paywalled,
        "crawl_config_id": source.crawl_config_id,
    }


def load_registry(path) -> list[Source]:
    """Read a registry file: a JSON array of Source records."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise ValidationError("registry file must be a JSON array")
    return [source_from_dict(rec) for rec in data]


def save_registry(sources: Iterable[Source], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([source_to_dict(s) for s in sources], fh, indent=2)
        fh.write("\n")
