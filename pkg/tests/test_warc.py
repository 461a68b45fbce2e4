from datetime import datetime, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from newstrust.warcfile import (
    FetchRecord,
    WarcFormatError,
    archive,
    read_warc,
)

NOW = datetime(2023, 5, 10, 12, 0, 0, 123000, tzinfo=timezone.utc)


def record(url="https://example.com/a", body=b"<html>hi</html>", status=200):
    return FetchRecord(
        url=url,
        status=status,
        headers=[("Content-Type", "text/html; charset=utf-8")],
        body=body,
        fetched_at=NOW,
    )


def test_round_trip_byte_identical_body(tmp_path):
    path = tmp_path / "t.warc"
    archive(record(body=b"\x00\xffbinary<html>"), path)
    (back,) = list(read_warc(path))
    assert back.body == b"\x00\xffbinary<html>"
    assert back.status == 200
    assert back.url == "https://example.com/a"
    assert back.fetched_at == NOW


def test_records_read_in_write_order(tmp_path):
    path = tmp_path / "t.warc"
    for i in range(5):
        archive(record(url=f"https://example.com/{i}", body=str(i).encode()), path)
    urls = [r.url for r in read_warc(path)]
    assert urls == [f"https://example.com/{i}" for i in range(5)]


def test_gzip_per_record_round_trip(tmp_path):
    path = tmp_path / "t.warc.gz"
    archive(record(body=b"abc" * 100), path, compress=True)
    archive(record(url="https://example.com/b", body=b"def"), path, compress=True)
    records = list(read_warc(path))
    assert [r.body for r in records] == [b"abc" * 100, b"def"]


def test_mixed_compression(tmp_path):
    path = tmp_path / "t.warc"
    archive(record(body=b"plain"), path, compress=False)
    archive(record(url="https://example.com/b", body=b"zipped"), path, compress=True)
    assert [r.body for r in read_warc(path)] == [b"plain", b"zipped"]


def test_empty_file_yields_empty_stream(tmp_path):
    path = tmp_path / "empty.warc"
    path.write_bytes(b"")
    assert list(read_warc(path)) == []


def test_corrupt_third_record_reports_offset(tmp_path):
    path = tmp_path / "t.warc"
    archive(record(url="https://example.com/0", body=b"zero"), path)
    archive(record(url="https://example.com/1", body=b"one"), path)
    corrupt_offset = path.stat().st_size
    path.write_bytes(path.read_bytes() + b"GARBAGE NOT A WARC RECORD\r\n\r\n")
    got = []
    with pytest.raises(WarcFormatError) as exc:
        for r in read_warc(path):
            got.append(r.url)
    assert got == ["https://example.com/0", "https://example.com/1"]
    assert exc.value.offset == corrupt_offset


def test_truncated_record_is_an_error(tmp_path):
    path = tmp_path / "t.warc"
    archive(record(body=b"full body"), path)
    data = path.read_bytes()
    path.write_bytes(data[:-10])
    with pytest.raises(WarcFormatError):
        list(read_warc(path))


def test_content_length_header_matches_payload(tmp_path):
    path = tmp_path / "t.warc"
    archive(record(body=b"x" * 57), path)
    raw = path.read_bytes()
    head, _, rest = raw.partition(b"\r\n\r\n")
    for line in head.split(b"\r\n"):
        if line.lower().startswith(b"content-length:"):
            declared = int(line.split(b":")[1])
    # rest ends with the record terminator
    assert rest.endswith(b"\r\n\r\n")
    assert len(rest) - 4 == declared


@settings(max_examples=50, deadline=None)
@given(st.binary(max_size=2048), st.booleans())
def test_random_bodies_round_trip(tmp_path_factory, body, compress):
    path = tmp_path_factory.mktemp("warc") / "t.warc"
    archive(record(body=body), path, compress=compress)
    (back,) = list(read_warc(path))
    assert back.body == body


def test_required_headers_present(tmp_path):
    path = tmp_path / "t.warc"
    archive(record(), path)
    raw = path.read_bytes().decode("latin-1")
    assert raw.startswith("WARC/1.1\r\n")
    for header in (
        "WARC-Type: response",
        "WARC-Record-ID: <urn:uuid:",
        "WARC-Date: 2023-05-10T12:00:00.123Z",
        "WARC-Target-URI: https://example.com/a",
        "Content-Type: application/http;msgtype=response",
    ):
        assert header in raw
