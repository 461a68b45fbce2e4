"""Article text extraction from WARC archives via per-source XPath rules.

Each matched node contributes its whitespace-collapsed text content; blocks
are joined by single newlines, in document order. Word count is the number
of whitespace-delimited tokens, which is the count the 200-word admission
filter operates on downstream.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime
from typing import Iterator, Optional

from . import htmlpath
from .warcfile import FetchRecord, read_warc

__all__ = [
    "ExtractionRules",
    "RawArticle",
    "ExtractionReport",
    "ExtractionMiss",
    "read_warc",
    "extract_text",
    "extract_all",
]


class ExtractionMiss(ValueError):
    """No text_xpath matched anything in the record."""


@dataclass(frozen=True)
class ExtractionRules:
    domain: str
    text_xpaths: tuple[str, ...]
    title_xpath: Optional[str] = None
    drop_xpaths: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.text_xpaths:
            raise ValueError("text_xpaths must be non-empty")

    @classmethod
    def from_dict(cls, data: dict) -> "ExtractionRules":
        return cls(
            domain=data["domain"],
            text_xpaths=tuple(data["text_xpaths"]),
            title_xpath=data.get("title_xpath"),
            drop_xpaths=tuple(data.get("drop_xpaths", ())),
        )

    @classmethod
    def load(cls, path) -> "ExtractionRules":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class RawArticle:
    url: str
    domain: str
    text: str
    word_count: int
    fetched_at: datetime
    title: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "url": self.url,
            "domain": self.domain,
            "title": self.title,
            "text": self.text,
            "word_count": self.word_count,
            "fetched_at": self.fetched_at.isoformat(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RawArticle":
        return cls(
            url=data["url"],
            domain=data["domain"],
            text=data["text"],
            word_count=data["word_count"],
            fetched_at=datetime.fromisoformat(data["fetched_at"]),
            title=data.get("title"),
        )


@dataclass
class ExtractionReport:
    records: int = 0
    extracted: int = 0
    misses: list[str] = field(default_factory=list)
    decode_fallbacks: list[str] = field(default_factory=list)


def _content_type(record: FetchRecord) -> Optional[str]:
    for name, value in record.headers:
        if name.lower() == "content-type":
            return value
    return None


def extract_text(record: FetchRecord, rules: ExtractionRules) -> RawArticle:
    """Extract one article body from an archived response.

    Drop-listed subtrees are removed first; then every text_xpath is
    evaluated and the matches concatenated in document order.
    """
    html = htmlpath.decode_html(record.body, _content_type(record))
    root = htmlpath.parse_html(html)
    for expr in rules.drop_xpaths:
        htmlpath.remove_all(root, expr)

    matched: list = []
    seen: set[int] = set()
    for expr in rules.text_xpaths:
        for elem in htmlpath.find_all(root, expr):
            if id(elem) not in seen:
                seen.add(id(elem))
                matched.append(elem)
    if not matched:
        raise ExtractionMiss(f"no text_xpath matched for {record.url}")
    order = {id(el): i for i, el in enumerate(root.iter())}
    matched.sort(key=lambda el: order[id(el)])

    blocks = [htmlpath.element_text(el) for el in matched]
    text = "\n".join(b for b in blocks if b)

    title = None
    if rules.title_xpath:
        hits = htmlpath.find_all(root, rules.title_xpath)
        if hits:
            title = htmlpath.element_text(hits[0]) or None

    return RawArticle(
        url=record.url,
        domain=rules.domain,
        text=text,
        word_count=len(text.split()),
        fetched_at=record.fetched_at,
        title=title,
    )


def extract_all(warc_path, rules: ExtractionRules) -> tuple[list[RawArticle], ExtractionReport]:
    """Extract every response record in the archive; misses are reported,
    never fatal."""
    articles: list[RawArticle] = []
    report = ExtractionReport()
    for record in read_warc(warc_path):
        report.records += 1
        try:
            articles.append(extract_text(record, rules))
            report.extracted += 1
        except ExtractionMiss:
            report.misses.append(record.url)
    return articles, report


def write_jsonl(articles: list[RawArticle], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for a in articles:
            fh.write(json.dumps(a.to_dict(), ensure_ascii=False) + "\n")


def read_jsonl(path) -> list[RawArticle]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(RawArticle.from_dict(json.loads(line)))
    return out
