"""Pagination crawler: enumerates a source's news-history pages, collects
article URLs, fetches article pages politely, and archives raw responses
as WARC records.

Politeness: at most one in-flight request per host, with a configurable
minimum gap between successive requests to the same host. robots.txt is
honored by default and can be overridden per config (the override is
logged).
"""

from __future__ import annotations

import logging
import re
import threading
import time
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional
from urllib import robotparser
from urllib.parse import urljoin, urlsplit

import httpx

from . import htmlpath
from .warcfile import FetchRecord, archive

log = logging.getLogger(__name__)

JOB_STATES = ("queued", "enumerating", "fetching", "done", "failed", "cancelled")

_TRANSITIONS = {
    "queued": {"enumerating", "cancelled", "failed"},
    "enumerating": {"fetching", "failed", "cancelled"},
    "fetching": {"done", "failed", "cancelled"},
}


class ConfigError(ValueError):
    """Malformed crawl configuration."""


class FetchError(RuntimeError):
    """A single URL could not be retrieved; recorded on the job, not fatal."""


@dataclass
class CrawlConfig:
    domain: str
    history_url_template: str
    article_link_selector: str
    start_page: int = 1
    max_pages: int = 50
    min_articles: int = 40
    max_articles: int = 294
    politeness_delay_ms: int = 1000
    timeout_ms: int = 30000
    max_retries: int = 2
    user_agent: str = "newstrust-crawler/0.1"
    ignore_robots: bool = False
    gzip_records: bool = False

    def __post_init__(self) -> None:
        if self.history_url_template.count("{page}") != 1:
            raise ConfigError(
                "history_url_template must contain '{page}' exactly once"
            )
        if self.min_articles > self.max_articles:
            raise ConfigError("min_articles must be <= max_articles")
        if self.start_page < 1 or self.max_pages < 1:
            raise ConfigError("start_page and max_pages must be positive")

    @classmethod
    def from_dict(cls, data: dict) -> "CrawlConfig":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in data.items() if k in known})


@dataclass
class CrawlJob:
    job_id: str
    domain: str
    state: str = "queued"
    urls_found: int = 0
    pages_fetched: int = 0
    archived: int = 0
    errors: list[tuple[str, str]] = field(default_factory=list)
    warc_path: Optional[str] = None
    started_at: Optional[datetime] = None
    finished_at: Optional[datetime] = None
    failure_reason: Optional[str] = None
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    _cancel: threading.Event = field(default_factory=threading.Event, repr=False)

    def transition(self, new_state: str) -> None:
        with self._lock:
            allowed = _TRANSITIONS.get(self.state, set())
            if new_state not in allowed:
                raise ValueError(f"illegal transition {self.state} -> {new_state}")
            self.state = new_state

    def cancel(self) -> None:
        self._cancel.set()

    @property
    def cancel_requested(self) -> bool:
        return self._cancel.is_set()

    def snapshot(self) -> dict:
        with self._lock:
            return {
                "job_id": self.job_id,
                "domain": self.domain,
                "state": self.state,
                "urls_found": self.urls_found,
                "pages_fetched": self.pages_fetched,
                "archived": self.archived,
                "errors": [list(e) for e in self.errors],
                "warc_path": self.warc_path,
                "started_at": self.started_at.isoformat() if self.started_at else None,
                "finished_at": self.finished_at.isoformat() if self.finished_at else None,
                "failure_reason": self.failure_reason,
            }


def enumerate_page_urls(config: CrawlConfig) -> list[str]:
    """History-page URLs for pages start_page .. start_page+max_pages-1."""
    return [
        config.history_url_template.replace("{page}", str(page))
        for page in range(config.start_page, config.start_page + config.max_pages)
    ]


def _is_xpath(selector: str) -> bool:
    # XPath selectors start with '//' or './'; anything else is a URL regex.
    return selector.startswith(("//", "./"))


def extract_article_urls(
    page_html: bytes, config: CrawlConfig, page_url: str
) -> list[str]:
    """Absolute article URLs from one history page, deduplicated, in
    document order. The selector is either an XPath over anchor elements
    or a regex applied to resolved absolute URLs."""
    root = htmlpath.parse_html(htmlpath.decode_html(page_html))
    selector = config.article_link_selector
    urls: list[str] = []
    seen: set[str] = set()
    if _is_xpath(selector):
        anchors = htmlpath.find_all(root, selector)
    else:
        anchors = htmlpath.find_all(root, ".//a")
        try:
            pattern = re.compile(selector)
        except re.error as exc:
            raise ConfigError(f"bad URL regex {selector!r}: {exc}") from None
    for a in anchors:
        href = a.get("href")
        if not href:
            continue
        absolute = urljoin(page_url, href)
        if not _is_xpath(selector) and not pattern.search(absolute):
            continue
        if absolute not in seen:
            seen.add(absolute)
            urls.append(absolute)
    return urls


class Fetcher:
    """HTTP client enforcing per-host politeness and bounded retries."""

    def __init__(self, config: CrawlConfig):
        self.config = config
        self._last_request: dict[str, float] = {}
        self._host_locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        self._client = httpx.Client(
            follow_redirects=True,
            max_redirects=5,
            timeout=config.timeout_ms / 1000.0,
            headers={"User-Agent": config.user_agent},
        )
        self._robots: dict[str, robotparser.RobotFileParser] = {}

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "Fetcher":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _host_lock(self, host: str) -> threading.Lock:
        with self._registry_lock:
            return self._host_locks.setdefault(host, threading.Lock())

    def _wait_politely(self, host: str) -> None:
        delay = self.config.politeness_delay_ms / 1000.0
        last = self._last_request.get(host)
        if last is not None:
            remaining = last + delay - time.monotonic()
            if remaining > 0:
                time.sleep(remaining)

    def allowed_by_robots(self, url: str) -> bool:
        if self.config.ignore_robots:
            return True
        parts = urlsplit(url)
        base = f"{parts.scheme}://{parts.netloc}"
        rp = self._robots.get(base)
        if rp is None:
            rp = robotparser.RobotFileParser(base + "/robots.txt")
            # the robots request counts against the per-host budget too
            with self._host_lock(parts.netloc):
                self._wait_politely(parts.netloc)
                try:
                    self._last_request[parts.netloc] = time.monotonic()
                    resp = self._client.get(base + "/robots.txt")
                except httpx.HTTPError:
                    rp.parse([])
                else:
                    self._last_request[parts.netloc] = time.monotonic()
                    if resp.status_code == 200:
                        rp.parse(resp.text.splitlines())
                    else:
                        rp.parse([])
            self._robots[base] = rp
        return rp.can_fetch(self.config.user_agent, url)

    def fetch(self, url: str) -> FetchRecord:
        """GET with redirects (max 5), retries with exponential backoff for
        transient failures, and per-host politeness spacing."""
        parts = urlsplit(url)
        if parts.scheme not in ("http", "https"):
            raise FetchError(f"unsupported URL scheme: {url}")
        host = parts.netloc
        last_error: Exception | None = None
        with self._host_lock(host):
            for attempt in range(self.config.max_retries + 1):
                self._wait_politely(host)
                try:
                    self._last_request[host] = time.monotonic()
                    resp = self._client.get(url)
                except httpx.HTTPError as exc:
                    last_error = exc
                else:
                    self._last_request[host] = time.monotonic()
                    if resp.status_code < 500 and resp.status_code != 429:
                        if resp.status_code >= 300:
                            raise FetchError(f"HTTP {resp.status_code} for {url}")
                        return FetchRecord(
                            url=str(resp.url),
                            status=resp.status_code,
                            headers=list(resp.headers.items()),
                            body=resp.content,
                            fetched_at=datetime.now(timezone.utc),
                        )
                    last_error = FetchError(f"HTTP {resp.status_code} for {url}")
                if attempt < self.config.max_retries:
                    time.sleep(0.05 * (2**attempt))
        raise FetchError(f"fetch failed for {url}: {last_error}")


def run_crawl(config: CrawlConfig, out_dir, job: Optional[CrawlJob] = None) -> CrawlJob:
    """Crawl one source end to end: enumerate history pages, collect article
    URLs, fetch and archive until max_articles or pages are exhausted.

    The job finishes `done` when at least min_articles were archived,
    otherwise `failed` with reason insufficient-articles. Pagination stops
    early on the first history page yielding no new article URLs.
    """
    if job is None:
        job = CrawlJob(job_id=uuid.uuid4().hex[:12], domain=config.domain)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    suffix = ".warc.gz" if config.gzip_records else ".warc"
    warc_path = out_dir / f"{config.domain}-{job.job_id}{suffix}"
    job.warc_path = str(warc_path)
    job.started_at = datetime.now(timezone.utc)
    if config.ignore_robots:
        log.warning("robots.txt override enabled for %s", config.domain)

    with Fetcher(config) as fetcher:
        job.transition("enumerating")
        article_urls: list[str] = []
        seen: set[str] = set()
        for page_url in enumerate_page_urls(config):
            if job.cancel_requested:
                job.transition("cancelled")
                job.finished_at = datetime.now(timezone.utc)
                return job
            if not fetcher.allowed_by_robots(page_url):
                job.errors.append((page_url, "robots-disallowed"))
                continue
            try:
                page = fetcher.fetch(page_url)
            except FetchError as exc:
                job.errors.append((page_url, str(exc)))
                continue
            job.pages_fetched += 1
            new_urls = [
                u
                for u in extract_article_urls(page.body, config, page_url)
                if u not in seen
            ]
            if not new_urls:
                break
            seen.update(new_urls)
            article_urls.extend(new_urls)
            if len(article_urls) >= config.max_articles:
                break
        job.urls_found = len(article_urls)

        job.transition("fetching")
        for url in article_urls:
            if job.archived >= config.max_articles:
                break
            if job.cancel_requested:
                job.transition("cancelled")
                job.finished_at = datetime.now(timezone.utc)
                return job
            if not fetcher.allowed_by_robots(url):
                job.errors.append((url, "robots-disallowed"))
                continue
            try:
                record = fetcher.fetch(url)
            except FetchError as exc:
                job.errors.append((url, str(exc)))
                continue
            archive(record, warc_path, compress=config.gzip_records)
            job.archived += 1

    if job.archived >= config.min_articles:
        job.transition("done")
    else:
        job.failure_reason = "insufficient-articles"
        job.transition("failed")
    job.finished_at = datetime.now(timezone.utc)
    return job
