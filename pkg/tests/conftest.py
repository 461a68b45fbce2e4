"""Shared fixtures: a local web server mimicking a paginated news site,
and a deterministic synthetic labeled corpus."""

from __future__ import annotations

import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

ARTICLES_PER_PAGE = 20
HISTORY_PAGES = 3
TOTAL_ARTICLES = ARTICLES_PER_PAGE * HISTORY_PAGES

# Article ids with hand-picked word counts (body words, //article/p only).
SHORT_ARTICLE = 7  # exactly 199 words
EXACT_ARTICLE = 8  # exactly 200 words
DEFAULT_WORDS = 240


def article_word_count(article_id: int) -> int:
    if article_id == SHORT_ARTICLE:
        return 199
    if article_id == EXACT_ARTICLE:
        return 200
    return DEFAULT_WORDS


def article_body_words(article_id: int) -> list[str]:
    n = article_word_count(article_id)
    return [f"a{article_id}w{j}" for j in range(n)]


def render_article(article_id: int) -> str:
    words = article_body_words(article_id)
    half = len(words) // 2
    return f"""<!DOCTYPE html>
<html><head><title>Article {article_id}</title></head>
<body>
<nav><a href="/">home</a><a href="/about">about</a></nav>
<article>
<h1>Story number {article_id}</h1>
<p>{' '.join(words[:half])}</p>
<p>{' '.join(words[half:])}</p>
</article>
<div class="share"><p>Share this story on antisocial media!</p></div>
</body></html>"""


def render_history(page: int) -> str:
    links = []
    if page <= HISTORY_PAGES:
        start = (page - 1) * ARTICLES_PER_PAGE
        for i in range(start, start + ARTICLES_PER_PAGE):
            links.append(f'<li><a class="story" href="/articles/{i}">Story {i}</a></li>')
            # A duplicate anchor to the same story; must be deduplicated.
            links.append(f'<li><a class="story" href="/articles/{i}#comments-stripped">x</a></li>')
    nav = "".join(f'<a href="/history/{p}/">page {p}</a>' for p in range(1, 6))
    return f"""<!DOCTYPE html>
<html><body>
<nav>{nav}</nav>
<ul>{''.join(links)}</ul>
</body></html>"""


class _Handler(BaseHTTPRequestHandler):
    def log_message(self, *args):  # keep test output quiet
        pass

    def do_GET(self):
        server = self.server
        with server.state_lock:
            server.request_log.append((self.path, time.monotonic()))
        path = self.path.split("#")[0].split("?")[0]
        if path.startswith("/history/"):
            page = int(path.strip("/").split("/")[-1])
            self._ok(render_history(page))
        elif path.startswith("/articles/"):
            article_id = int(path.strip("/").split("/")[-1])
            if article_id >= TOTAL_ARTICLES:
                self._status(404, "not found")
            else:
                self._ok(render_article(article_id))
        elif path == "/flaky":
            with server.state_lock:
                server.flaky_hits += 1
                hits = server.flaky_hits
            if hits == 1:
                self._status(503, "try later")
            else:
                self._ok("<html><body><p>recovered</p></body></html>")
        elif path == "/robots.txt":
            self._status(404, "no robots")
        else:
            self._status(404, "not found")

    def _ok(self, body: str):
        data = body.encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "text/html; charset=utf-8")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _status(self, code: int, body: str):
        data = body.encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "text/plain")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)


class FixtureSite:
    def __init__(self):
        self.server = ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
        self.server.request_log = []
        self.server.flaky_hits = 0
        self.server.state_lock = threading.Lock()
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)
        self.thread.start()

    @property
    def base_url(self) -> str:
        host, port = self.server.server_address
        return f"http://{host}:{port}"

    @property
    def request_log(self):
        with self.server.state_lock:
            return list(self.server.request_log)

    def reset(self):
        with self.server.state_lock:
            self.server.request_log.clear()
            self.server.flaky_hits = 0

    def stop(self):
        self.server.shutdown()
        self.server.server_close()


@pytest.fixture(scope="session")
def fixture_site():
    site = FixtureSite()
    yield site
    site.stop()


@pytest.fixture
def site(fixture_site):
    fixture_site.reset()
    return fixture_site
