"""Minimal WARC/1.1 writer and reader for archived HTTP responses.

Only `response` records are written. The record payload is a reconstructed
HTTP/1.1 response (status line, headers, CRLF, body); Content-Length is the
exact payload byte count and the block is terminated by CRLF CRLF. Records
may optionally be gzipped individually; the reader detects the gzip magic
per record, so mixed archives read fine.
"""

from __future__ import annotations

import gzip
import io
import uuid
import zlib
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import BinaryIO, Iterator

CRLF = b"\r\n"
_GZIP_MAGIC = b"\x1f\x8b"

_REASONS = {
    200: "OK", 301: "Moved Permanently", 302: "Found", 304: "Not Modified",
    400: "Bad Request", 403: "Forbidden", 404: "Not Found",
    429: "Too Many Requests", 500: "Internal Server Error",
    502: "Bad Gateway", 503: "Service Unavailable",
}


class WarcFormatError(ValueError):
    """Truncated or corrupt record; carries the byte offset of the record."""

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} (at byte offset {offset})")


@dataclass
class FetchRecord:
    url: str
    status: int
    headers: list[tuple[str, str]]
    body: bytes
    fetched_at: datetime = field(
        default_factory=lambda: datetime.now(timezone.utc)
    )


def _http_payload(record: FetchRecord) -> bytes:
    reason = _REASONS.get(record.status, "Unknown")
    lines = [f"HTTP/1.1 {record.status} {reason}".encode("ascii")]
    seen_cl = False
    for name, value in record.headers:
        if name.lower() == "content-length":
            # Rewrite to the actual archived body length.
            value = str(len(record.body))
            seen_cl = True
        lines.append(f"{name}: {value}".encode("latin-1"))
    if not seen_cl:
        lines.append(b"Content-Length: " + str(len(record.body)).encode())
    return CRLF.join(lines) + CRLF + CRLF + record.body


def _parse_http_payload(payload: bytes, offset: int) -> tuple[int, list[tuple[str, str]], bytes]:
    head, sep, body = payload.partition(CRLF + CRLF)
    if not sep:
        raise WarcFormatError("HTTP payload missing header terminator", offset)
    lines = head.split(CRLF)
    parts = lines[0].split(b" ", 2)
    if len(parts) < 2 or not parts[1].isdigit():
        raise WarcFormatError("malformed HTTP status line", offset)
    status = int(parts[1])
    headers = []
    for line in lines[1:]:
        name, _, value = line.partition(b":")
        headers.append((name.decode("latin-1").strip(), value.decode("latin-1").strip()))
    return status, headers, body


def warc_timestamp(dt: datetime) -> str:
    """ISO-8601 UTC with millisecond precision, as written in WARC-Date."""
    dt = dt.astimezone(timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%S.") + f"{dt.microsecond // 1000:03d}Z"


def write_response_record(
    fh: BinaryIO, record: FetchRecord, *, compress: bool = False
) -> int:
    """Append one WARC response record; returns the record's byte offset."""
    offset = fh.tell()
    payload = _http_payload(record)
    headers = [
        b"WARC/1.1",
        b"WARC-Type: response",
        b"WARC-Record-ID: <urn:uuid:" + str(uuid.uuid4()).encode() + b">",
        b"WARC-Date: " + warc_timestamp(record.fetched_at).encode(),
        b"WARC-Target-URI: " + record.url.encode(),
        b"Content-Type: application/http;msgtype=response",
        b"Content-Length: " + str(len(payload)).encode(),
    ]
    block = CRLF.join(headers) + CRLF + CRLF + payload + CRLF + CRLF
    if compress:
        block = gzip.compress(block, mtime=0)
    fh.write(block)
    return offset


def archive(record: FetchRecord, warc_path, *, compress: bool = False) -> int:
    """Append a response record to the archive at warc_path."""
    with open(warc_path, "ab") as fh:
        return write_response_record(fh, record, compress=compress)


def _read_exact(fh: BinaryIO, n: int, offset: int) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise WarcFormatError(f"truncated record: wanted {n} bytes, got {len(data)}", offset)
    return data


def _iter_blocks(fh: BinaryIO) -> Iterator[tuple[int, BinaryIO]]:
    """Yield (offset, stream) per record, transparently ungzipping."""
    while True:
        offset = fh.tell()
        magic = fh.read(2)
        if not magic:
            return
        fh.seek(offset)
        if magic == _GZIP_MAGIC:
            # Decompress exactly one gzip member, then reposition.
            d = zlib.decompressobj(wbits=zlib.MAX_WBITS | 16)
            raw = io.BytesIO()
            while not d.eof:
                chunk = fh.read(65536)
                if not chunk:
                    raise WarcFormatError("truncated gzip member", offset)
                raw.write(d.decompress(chunk))
            fh.seek(fh.tell() - len(d.unused_data))
            raw.seek(0)
            yield offset, raw
        else:
            yield offset, fh


def read_warc(path) -> Iterator[FetchRecord]:
    """Yield response records from a WARC file in write order.

    Raises WarcFormatError (with the byte offset) on the first corrupt or
    truncated record; records before it are yielded normally.
    """
    with open(path, "rb") as fh:
        for offset, stream in _iter_blocks(fh):
            version = stream.readline()
            if not version.startswith(b"WARC/"):
                raise WarcFormatError("missing WARC version line", offset)
            headers: dict[str, str] = {}
            while True:
                line = stream.readline()
                if line in (CRLF, b"\n"):
                    break
                if not line:
                    raise WarcFormatError("unterminated WARC header block", offset)
                name, _, value = line.decode("latin-1").partition(":")
                headers[name.strip().lower()] = value.strip()
            try:
                length = int(headers["content-length"])
            except (KeyError, ValueError):
                raise WarcFormatError("missing or bad Content-Length", offset) from None
            payload = _read_exact(stream, length, offset)
            if _read_exact(stream, 4, offset) != CRLF + CRLF:
                raise WarcFormatError("record not terminated by CRLF CRLF", offset)
            if headers.get("warc-type") != "response":
                continue
            status, http_headers, body = _parse_http_payload(payload, offset)
            date = headers.get("warc-date", "")
            try:
                fetched_at = datetime.strptime(date, "%Y-%m-%dT%H:%M:%S.%fZ").replace(
                    tzinfo=timezone.utc
                )
            except ValueError:
                fetched_at = datetime.now(timezone.utc)
            yield FetchRecord(
                url=headers.get("warc-target-uri", ""),
                status=status,
                headers=http_headers,
                body=body,
                fetched_at=fetched_at,
            )
