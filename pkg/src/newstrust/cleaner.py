"""Boilerplate removal and the minimum-word admission filter.

Repetitive per-source fragments (thank-you messages, signatures, slogans)
are mined by frequency: sentence-like segments long enough to be
distinctive that recur across enough of a source's articles. Cleaning also
strips configured regex patterns (dates, bylines) and re-normalizes
whitespace, after which the word-count filter applies.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace

from .extractor import RawArticle

_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")


@dataclass(frozen=True)
class CleaningConfig:
    repeat_fraction_threshold: float = 0.30
    repeat_min_articles: int = 3
    min_fragment_chars: int = 20
    strip_patterns: tuple[str, ...] = ()
    min_words: int = 200

    def __post_init__(self) -> None:
        if not 0 < self.repeat_fraction_threshold <= 1:
            raise ValueError("repeat_fraction_threshold must be in (0, 1]")
        if self.repeat_min_articles < 2:
            raise ValueError("repeat_min_articles must be >= 2")
        if self.min_words < 0:
            raise ValueError("min_words must be >= 0")


@dataclass
class CleanReport:
    removed_fragments: dict[str, int] = field(default_factory=dict)
    articles_in: int = 0
    articles_out: int = 0
    articles_dropped_short: int = 0

    def to_dict(self) -> dict:
        return {
            "removed_fragments": self.removed_fragments,
            "articles_in": self.articles_in,
            "articles_out": self.articles_out,
            "articles_dropped_short": self.articles_dropped_short,
        }


def split_fragments(text: str, min_chars: int) -> list[str]:
    """Sentence-like segments of at least min_chars characters."""
    segments: list[str] = []
    for line in text.split("\n"):
        for seg in _SENTENCE_SPLIT.split(line):
            seg = seg.strip()
            if len(seg) >= min_chars:
                segments.append(seg)
    return segments


def find_repeated_fragments(
    articles: list[RawArticle], config: CleaningConfig
) -> set[str]:
    """Fragments occurring in >= repeat_min_articles articles AND in
    >= repeat_fraction_threshold of this source's articles. Requires at
    least two articles; thresholds are inclusive."""
    if len(articles) < 2:
        return set()
    n = len(articles)
    presence: dict[str, int] = {}
    for article in articles:
        for frag in set(split_fragments(article.text, config.min_fragment_chars)):
            presence[frag] = presence.get(frag, 0) + 1
    return {
        frag
        for frag, count in presence.items()
        if count >= config.repeat_min_articles
        and count / n >= config.repeat_fraction_threshold
    }


def normalize_whitespace(text: str) -> str:
    """Single spaces within lines, single newlines between non-empty lines."""
    lines = [" ".join(line.split()) for line in text.split("\n")]
    return "\n".join(line for line in lines if line)


def clean_text(text: str, fragments: set[str], config: CleaningConfig) -> str:
    # Deletion (not space substitution) keeps the no-word-count-increase
    # invariant: removing characters can merge tokens but never split one.
    for frag in sorted(fragments, key=len, reverse=True):
        text = text.replace(frag, "")
    for pattern in config.strip_patterns:
        text = re.sub(pattern, "", text)
    return normalize_whitespace(text)


def clean_article(
    raw: RawArticle, fragments: set[str], config: CleaningConfig
) -> RawArticle:
    """Remove boilerplate fragments and strip-pattern matches, re-normalize
    whitespace, and recompute the word count."""
    text = clean_text(raw.text, fragments, config)
    return replace(raw, text=text, word_count=len(text.split()))


def filter_min_words(
    articles: list[RawArticle], config: CleaningConfig
) -> tuple[list[RawArticle], list[RawArticle]]:
    """Partition into (kept, dropped) by the post-cleaning word count."""
    kept = [a for a in articles if a.word_count >= config.min_words]
    dropped = [a for a in articles if a.word_count < config.min_words]
    return kept, dropped


def clean_corpus(
    articles: list[RawArticle], config: CleaningConfig
) -> tuple[list[RawArticle], CleanReport]:
    """Full pass: per-source fragment mining, cleaning, then the word-count
    filter."""
    report = CleanReport(articles_in=len(articles))
    by_domain: dict[str, list[RawArticle]] = {}
    for a in articles:
        by_domain.setdefault(a.domain, []).append(a)

    cleaned: list[RawArticle] = []
    for domain in sorted(by_domain):
        group = by_domain[domain]
        fragments = find_repeated_fragments(group, config)
        for frag in sorted(fragments):
            count = sum(1 for a in group if frag in a.text)
            report.removed_fragments[frag] = count
        cleaned.extend(clean_article(a, fragments, config) for a in group)

    kept, dropped = filter_min_words(cleaned, config)
    report.articles_dropped_short = len(dropped)
    report.articles_out = len(kept)
    return kept, report
