"""Lenient HTML parsing plus an XPath subset for node selection.

Real-world article pages are frequently malformed, so the parser never
raises: unknown or mismatched end tags are dropped, void elements close
themselves, and <p>/<li>-style implied closes are handled. The result is a
standard ElementTree rooted at a synthetic document node, so absolute paths
work uniformly.

Supported path subset (the extraction contract): child and descendant
steps, `*`, attribute predicates `[@a]` / `[@a='v']`, positional and
child-existence predicates as implemented by ElementTree's ElementPath,
and an optional trailing `/text()` step. Leading `//` and `/` are both
accepted.
"""

from __future__ import annotations

from html import unescape
from html.parser import HTMLParser
from xml.etree import ElementTree as ET

VOID_ELEMENTS = frozenset(
    "area base br col embed hr img input link meta param source track wbr".split()
)

# Opening one of these closes an open element of the same (or listed) tag.
_IMPLIED_CLOSE = {
    "p": {"p"},
    "li": {"li"},
    "option": {"option"},
    "tr": {"tr", "td", "th"},
    "td": {"td", "th"},
    "th": {"td", "th"},
    "dd": {"dd", "dt"},
    "dt": {"dd", "dt"},
}

DOCUMENT_TAG = "#document"


class XPathError(ValueError):
    """Unsupported or syntactically invalid path expression."""


class _TreeBuilder(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.root = ET.Element(DOCUMENT_TAG)
        self.stack = [self.root]

    def _append_text(self, text: str) -> None:
        parent = self.stack[-1]
        if len(parent):
            last = parent[-1]
            last.tail = (last.tail or "") + text
        else:
            parent.text = (parent.text or "") + text

    def handle_starttag(self, tag, attrs):
        tag = tag.lower()
        close_set = _IMPLIED_CLOSE.get(tag)
        if close_set and len(self.stack) > 1 and self.stack[-1].tag in close_set:
            self.stack.pop()
        elem = ET.SubElement(
            self.stack[-1], tag, {k: (v or "") for k, v in attrs}
        )
        if tag not in VOID_ELEMENTS:
            self.stack.append(elem)

    def handle_startendtag(self, tag, attrs):
        ET.SubElement(self.stack[-1], tag.lower(), {k: (v or "") for k, v in attrs})

    def handle_endtag(self, tag):
        tag = tag.lower()
        if tag in VOID_ELEMENTS:
            return
        for i in range(len(self.stack) - 1, 0, -1):
            if self.stack[i].tag == tag:
                del self.stack[i:]
                return
        # Stray end tag: ignore.

    def handle_data(self, data):
        if data:
            self._append_text(data)


def parse_html(text: str) -> ET.Element:
    """Parse (possibly malformed) HTML into a tree under a document root."""
    builder = _TreeBuilder()
    builder.feed(text)
    builder.close()
    return builder.root


def decode_html(body: bytes, content_type: str | None = None) -> str:
    """Decode an HTTP body using the Content-Type charset, falling back to
    UTF-8 with replacement. Returns the decoded text."""
    charset = None
    if content_type and "charset=" in content_type:
        charset = content_type.split("charset=", 1)[1].split(";")[0].strip(" \"'")
    if charset:
        try:
            return body.decode(charset)
        except (UnicodeDecodeError, LookupError):
            pass
    return body.decode("utf-8", errors="replace")


def _normalize(expr: str) -> tuple[str, bool]:
    """Translate the supported path syntax into an ElementPath expression
    evaluated from the document root. Returns (path, wants_text)."""
    expr = expr.strip()
    if not expr:
        raise XPathError("empty path expression")
    wants_text = False
    if expr.endswith("/text()"):
        wants_text = True
        expr = expr[: -len("/text()")]
    if expr.startswith("//"):
        expr = ".//" + expr[2:]
    elif expr.startswith("/"):
        expr = "./" + expr[1:]
    elif not expr.startswith("."):
        expr = ".//" + expr
    return expr, wants_text


def find_all(root: ET.Element, expr: str) -> list[ET.Element]:
    """Evaluate a path expression; matches are returned in document order."""
    path, _ = _normalize(expr)
    try:
        matches = root.findall(path)
    except (SyntaxError, TypeError, KeyError) as exc:
        raise XPathError(f"bad path expression {expr!r}: {exc}") from None
    if len(matches) <= 1:
        return matches
    order = {id(el): i for i, el in enumerate(root.iter())}
    return sorted(matches, key=lambda el: order[id(el)])


def element_text(elem: ET.Element) -> str:
    """All text content of an element, whitespace-collapsed. <br> and <hr>
    count as whitespace so words never merge across forced breaks."""
    parts: list[str] = []

    def walk(e: ET.Element) -> None:
        if e.tag in ("br", "hr"):
            parts.append(" ")
        if e.text:
            parts.append(e.text)
        for child in e:
            walk(child)
            if child.tail:
                parts.append(child.tail)

    walk(elem)
    return " ".join("".join(parts).split())


def remove_all(root: ET.Element, expr: str) -> int:
    """Remove every subtree matched by the expression; returns the count."""
    doomed = find_all(root, expr)
    if not doomed:
        return 0
    doomed_ids = {id(el) for el in doomed}
    removed = 0
    for parent in root.iter():
        for child in list(parent):
            if id(child) in doomed_ids:
                parent.remove(child)
                removed += 1
    return removed
