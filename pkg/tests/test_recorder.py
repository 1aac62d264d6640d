"""Session-recorder tests: append-only logs, export, degradation."""

import json
import zipfile

import pytest

from mirrorcast import recorder
from mirrorcast.recorder import RecorderError, SessionRecord, UnknownSession, export
from mirrorcast.wire import EnrichedView, InputEvent, InputKind


def make_view(seq, screenshot=b"\x89PNG\r\n\x1a\nfake", path="/"):
    return EnrichedView(
        sequence=seq,
        screenshot=screenshot,
        image_width=8,
        image_height=8,
        elements=(),
        page_title="T",
        favicon_path="/__icon/blank",
        display_path=path,
        history_back=0,
        history_forward=0,
    )


def events_for_click_and_name():
    yield InputEvent(kind=InputKind.CLICK, x=52, y=142, timestamp_ms=1)
    for i, ch in enumerate("John"):
        yield InputEvent(kind=InputKind.KEY_PRESS, key=ch, timestamp_ms=2 + i)


def test_click_plus_keys_logged_in_order(tmp_path):
    record = SessionRecord(tmp_path, "http://t.example/")
    for ts, event in enumerate(events_for_click_and_name()):
        record.record_event(ts, event)
    record.close()

    logged = recorder.load_events(tmp_path, record.session_id)
    assert len(logged) == 5
    assert logged[0]["event"]["kind"] == "click"
    assert logged[0]["event"]["x"] == 52 and logged[0]["event"]["y"] == 142
    assert [e["event"]["key"] for e in logged[1:]] == ["J", "o", "h", "n"]
    assert [e["ts"] for e in logged] == sorted(e["ts"] for e in logged)


def test_screenshots_off_records_views_without_refs(tmp_path):
    record = SessionRecord(tmp_path, "http://t.example/", record_screenshots=False)
    record.record_view(make_view(1))
    record.record_view(make_view(2, screenshot=None))
    record.close()
    views = recorder.load_views(tmp_path, record.session_id)
    assert [v["screenshotRef"] for v in views] == [None, None]


def test_screenshots_on_stores_files_and_dedup_reuses_ref(tmp_path):
    record = SessionRecord(tmp_path, "http://t.example/", record_screenshots=True)
    record.record_view(make_view(1))
    record.record_view(make_view(2, screenshot=None))
    record.record_view(make_view(3, screenshot=b"\x89PNG\r\n\x1a\nother"))
    record.close()
    views = recorder.load_views(tmp_path, record.session_id)
    assert views[0]["screenshotRef"] == "shots/000001.png"
    assert views[1]["screenshotRef"] == "shots/000001.png"
    assert views[2]["screenshotRef"] == "shots/000003.png"
    root = tmp_path / record.session_id
    assert (root / "shots/000001.png").read_bytes().endswith(b"fake")
    assert (root / "shots/000003.png").read_bytes().endswith(b"other")


def test_export_empty_session_has_empty_event_log(tmp_path):
    record = SessionRecord(tmp_path, "http://t.example/")
    record.close()
    archive = export(tmp_path, record.session_id)
    with zipfile.ZipFile(archive) as zf:
        names = set(zf.namelist())
        assert "meta.json" in names
        assert "events.ndjson" in names
        assert zf.read("events.ndjson") == b""


def test_export_unknown_session_raises(tmp_path):
    with pytest.raises(UnknownSession):
        export(tmp_path, "deadbeef")


def test_export_requires_closed_session(tmp_path):
    record = SessionRecord(tmp_path, "http://t.example/")
    with pytest.raises(RecorderError):
        export(tmp_path, record.session_id)
    record.close()
    assert export(tmp_path, record.session_id).exists()


def test_exported_archive_reparses(tmp_path):
    record = SessionRecord(tmp_path, "http://t.example/", record_screenshots=True)
    for ts, event in enumerate(events_for_click_and_name()):
        record.record_event(ts, event)
    record.record_view(make_view(1, path="/login"))
    record.close()

    archive = export(tmp_path, record.session_id)
    with zipfile.ZipFile(archive) as zf:
        meta = json.loads(zf.read("meta.json"))
        assert meta["sessionId"] == record.session_id
        assert meta["closedAt"] is not None
        events = [json.loads(line) for line in zf.read("events.ndjson").splitlines()]
        assert len(events) == 5
        views = [json.loads(line) for line in zf.read("views.ndjson").splitlines()]
        assert views[0]["displayPath"] == "/login"
        assert zf.read(views[0]["screenshotRef"]).startswith(b"\x89PNG")


def test_session_ids_are_128_bit_random(tmp_path):
    a = SessionRecord(tmp_path, "http://t.example/")
    b = SessionRecord(tmp_path, "http://t.example/")
    assert a.session_id != b.session_id
    assert len(bytes.fromhex(a.session_id)) == 16
    a.close()
    b.close()


def test_storage_failure_disables_recording_but_does_not_raise(tmp_path):
    record = SessionRecord(tmp_path, "http://t.example/")
    record._events.close()  # simulate the disk going away mid-session
    record.record_event(1, InputEvent(kind=InputKind.CLICK, x=1, y=1))
    assert record.disabled
    # subsequent writes are silently skipped; the session stays alive
    record.record_event(2, InputEvent(kind=InputKind.CLICK, x=2, y=2))
    record.record_view(make_view(1))
    record.close()


def test_no_mutation_after_write(tmp_path):
    record = SessionRecord(tmp_path, "http://t.example/")
    record.record_event(1, InputEvent(kind=InputKind.CLICK, x=1, y=2))
    first = (tmp_path / record.session_id / "events.ndjson").read_text()
    record.record_event(2, InputEvent(kind=InputKind.CLICK, x=3, y=4))
    second = (tmp_path / record.session_id / "events.ndjson").read_text()
    assert second.startswith(first)
    record.close()
