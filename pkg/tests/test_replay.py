"""Replay-engine tests: ordering, coalescing, quiescence capture."""

import threading
import time

import pytest

from mirrorcast.composer import ViewComposer
from mirrorcast.replay import QueueClosed, ReplayEngine, ReplayQueue
from mirrorcast.wire import DragPhase, InputEvent, InputKind



def click(x, y):
    return InputEvent(kind=InputKind.CLICK, x=x, y=y)


def key(k):
    return InputEvent(kind=InputKind.KEY_PRESS, key=k)


def text(element_id, value):
    return InputEvent(kind=InputKind.TEXT_CHANGED, element_id=element_id, text=value)


def drag(x, y, phase):
    return InputEvent(kind=InputKind.DRAG_MOVE, x=x, y=y, phase=phase)


def make_engine(session, origin, quiescence_ms=120):
    composer = ViewComposer(origin)
    queue = ReplayQueue(quiescence_ms=quiescence_ms)
    engine = ReplayEngine(
        session,
        queue,
        resolve_url=composer.resolve_proxy_path,
        reextract=lambda: composer.extract_elements(session),
    )
    return composer, queue, engine


def page_log(session):
    return session.execute_script("return window.__fixtureLog || [];")


def element_ids(composer, session):
    records = composer.extract_elements(session)
    elements = composer.descriptors(records, 1280, 3000)
    return {e.text or e.element_id: e for e in elements}, elements


def login_fields(composer, session):
    """(username, password) descriptors from the login fixture, by position."""
    _, elements = element_ids(composer, session)
    boxes = sorted(
        (e for e in elements if e.kind.value == "textBox"), key=lambda e: e.y
    )
    return boxes[0], boxes[1]


# --- queue behaviour ----------------------------------------------------------


def test_queue_preserves_fifo_order():
    queue = ReplayQueue()
    queue.submit(click(1, 1))
    queue.submit(key("a"))
    queue.submit(click(2, 2))
    taken = [queue.take(0), queue.take(0), queue.take(0)]
    assert [t.kind for t in taken] == [InputKind.CLICK, InputKind.KEY_PRESS, InputKind.CLICK]


def test_queue_coalesces_consecutive_text_for_same_element():
    queue = ReplayQueue()
    queue.submit(text("e1", "Jo"))
    queue.submit(text("e1", "John"))
    first = queue.take(0)
    assert first.text == "John"
    assert queue.take(0) is None


def test_queue_does_not_coalesce_across_elements():
    queue = ReplayQueue()
    queue.submit(text("e1", "a"))
    queue.submit(text("e2", "b"))
    queue.submit(text("e1", "c"))
    values = [queue.take(0).text for _ in range(3)]
    assert values == ["a", "b", "c"]


def test_closed_queue_rejects_submit():
    queue = ReplayQueue()
    queue.close()
    with pytest.raises(QueueClosed):
        queue.submit(click(1, 1))


# --- execution against the fixture browser --------------------------------------


def test_click_then_key_execute_in_order(login_site, browser_at):
    session = browser_at(login_site.url)
    composer, queue, engine = make_engine(session, login_site.url)
    username, _ = login_fields(composer, session)
    queue.submit(click(username.x + 5, username.y + 5))
    queue.submit(key("J"))
    result = engine.drain_and_capture(wait_first_s=1)
    assert [e.kind for e in result.executed] == [InputKind.CLICK, InputKind.KEY_PRESS]
    log = page_log(session)
    click_idx = next(i for i, entry in enumerate(log) if entry["type"] == "click")
    input_idx = next(i for i, entry in enumerate(log) if entry["type"] == "input")
    assert click_idx < input_idx
    assert log[input_idx]["value"] == "J"


def test_coalesced_text_applies_final_value_once(login_site, browser_at):
    session = browser_at(login_site.url)
    composer, queue, engine = make_engine(session, login_site.url)
    field, _ = login_fields(composer, session)
    queue.submit(text(field.element_id, "Jo"))
    queue.submit(text(field.element_id, "John"))
    engine.drain_and_capture(wait_first_s=1)
    inputs = [e for e in page_log(session) if e["type"] == "input"]
    assert [e["value"] for e in inputs] == ["John"]


def test_events_for_two_elements_execute_in_order(login_site, browser_at):
    session = browser_at(login_site.url)
    composer, queue, engine = make_engine(session, login_site.url)
    records = composer.extract_elements(session)
    elements = composer.descriptors(records, 1280, 720)
    text_boxes = [e for e in elements if e.kind.value == "textBox"]
    queue.submit(text(text_boxes[0].element_id, "ada"))
    queue.submit(text(text_boxes[1].element_id, "pw"))
    engine.drain_and_capture(wait_first_s=1)
    inputs = [e for e in page_log(session) if e["type"] == "input"]
    assert [e["id"] for e in inputs] == ["username", "password"]


def test_key_burst_yields_single_capture_with_all_chars(login_site, browser_at):
    session = browser_at(login_site.url)
    composer, queue, engine = make_engine(session, login_site.url)
    session.execute_script("document.getElementById('username').focus(); return 1;")
    for k in ["J", "o", "h", "n"]:
        queue.submit(key(k))
    result = engine.drain_and_capture(wait_first_s=1)
    assert len(result.executed) == 4
    value = session.execute_script("return document.getElementById('username').value;")
    assert value == "John"


def test_click_on_link_captures_target_page(static_site, browser_at):
    session = browser_at(static_site.url)
    composer, queue, engine = make_engine(session, static_site.url)
    boxes, _ = element_ids(composer, session)
    alpha = boxes["Alpha"]
    queue.submit(click(alpha.x + 5, alpha.y + 5))
    result = engine.drain_and_capture(wait_first_s=1)
    assert result.snapshot.current_url.endswith("/p/alpha.html")
    assert result.snapshot.title == "Page alpha"


def test_forced_capture_with_no_events(static_site, browser_at):
    session = browser_at(static_site.url)
    _, _, engine = make_engine(session, static_site.url)
    result = engine.drain_and_capture(force=True)
    assert result.executed == []
    assert result.snapshot.title == "Fixture One"


def test_idle_drain_returns_none(static_site, browser_at):
    session = browser_at(static_site.url)
    _, _, engine = make_engine(session, static_site.url)
    assert engine.drain_and_capture(wait_first_s=0.05) is None


def test_drag_gesture_buffered_into_one_drag(slider_site, browser_at):
    session = browser_at(slider_site.url)
    _, queue, engine = make_engine(session, slider_site.url)
    queue.submit(drag(102, 110, DragPhase.START))
    queue.submit(drag(200, 110, DragPhase.MOVE))
    queue.submit(drag(300, 110, DragPhase.END))
    engine.drain_and_capture(wait_first_s=1)
    value = int(session.execute_script("return document.getElementById('slider').value;"))
    assert abs(value - 50) <= 1


def test_navigate_event_resolves_proxy_path(static_site, browser_at):
    session = browser_at(static_site.url)
    _, queue, engine = make_engine(session, static_site.url)
    queue.submit(InputEvent(kind=InputKind.NAVIGATE, url="/p/beta.html"))
    result = engine.drain_and_capture(wait_first_s=1)
    assert result.snapshot.current_url.endswith("/p/beta.html")


def test_history_events_execute_and_empties_are_dropped(multipage_site, browser_at):
    session = browser_at(multipage_site.url)
    _, queue, engine = make_engine(session, multipage_site.url)
    queue.submit(InputEvent(kind=InputKind.NAVIGATE, url="/a.html"))
    queue.submit(InputEvent(kind=InputKind.HISTORY_BACK))
    result = engine.drain_and_capture(wait_first_s=1)
    assert result.snapshot.current_url.rstrip("/") == multipage_site.url.rstrip("/")
    # back at depth 0 must be dropped without tearing the session down
    queue.submit(InputEvent(kind=InputKind.HISTORY_BACK))
    queue.submit(InputEvent(kind=InputKind.HISTORY_BACK))
    result = engine.drain_and_capture(wait_first_s=1)
    assert result is not None


def test_stale_text_event_retries_then_drops(login_site, browser_at):
    session = browser_at(login_site.url)
    composer, queue, engine = make_engine(session, login_site.url)
    field, _ = login_fields(composer, session)
    reextractions = []
    engine.reextract = lambda: reextractions.append(1)
    session.navigate(login_site.url + "about.html")
    queue.submit(text(field.element_id, "late"))
    result = engine.drain_and_capture(wait_first_s=1)
    assert result is not None
    assert reextractions == [1]


def test_events_arriving_during_quiescence_extend_the_cycle(login_site, browser_at):
    session = browser_at(login_site.url)
    composer, queue, engine = make_engine(session, login_site.url, quiescence_ms=250)
    session.execute_script("document.getElementById('username').focus(); return 1;")
    queue.submit(key("a"))

    def late_submit():
        time.sleep(0.1)
        queue.submit(key("b"))

    thread = threading.Thread(target=late_submit)
    thread.start()
    result = engine.drain_and_capture(wait_first_s=1)
    thread.join()
    assert len(result.executed) == 2
    value = session.execute_script("return document.getElementById('username').value;")
    assert value == "ab"


def test_recorded_log_replays_to_identical_field_state(login_site, browser_at, tmp_path):
    """Replaying a session's event log against a fresh page reproduces the
    original final field values (the recorded log is a faithful script)."""
    from mirrorcast.recorder import SessionRecord, load_events
    from mirrorcast.wire import InputEvent as WireEvent

    def run_events(session, events):
        composer, queue, engine = make_engine(session, login_site.url)
        for event in events:
            queue.submit(event)
        engine.drain_and_capture(wait_first_s=2)
        return session.execute_script(
            "return [document.getElementById('username').value,"
            " document.getElementById('password').value];"
        )

    # original run, recorded the way the gateway records at ingest
    first = browser_at(login_site.url)
    composer, _, _ = make_engine(first, login_site.url)
    user_el, pass_el = login_fields(composer, first)
    script = [
        text(user_el.element_id, "recorded-user"),
        click(pass_el.x + 3, pass_el.y + 3),
        key("p"),
        key("w"),
    ]
    record = SessionRecord(tmp_path, login_site.url)
    for i, event in enumerate(script):
        record.record_event(i, event)
    original = run_events(first, script)
    record.close()

    # replay the persisted log into a brand-new session
    logged = load_events(tmp_path, record.session_id)
    replayed_events = [WireEvent.from_body(e["event"]) for e in logged]
    second = browser_at(login_site.url)
    # element handles must come from the new page's own extraction
    composer2, queue2, engine2 = make_engine(second, login_site.url)
    user2, pass2 = login_fields(composer2, second)
    remap = {user_el.element_id: user2.element_id, pass_el.element_id: pass2.element_id}
    from dataclasses import replace as dc_replace

    replayed_events = [
        dc_replace(e, element_id=remap.get(e.element_id, e.element_id))
        if e.element_id is not None
        else e
        for e in replayed_events
    ]
    for event in replayed_events:
        queue2.submit(event)
    engine2.drain_and_capture(wait_first_s=2)
    replayed = second.execute_script(
        "return [document.getElementById('username').value,"
        " document.getElementById('password').value];"
    )
    assert replayed == original == ["recorded-user", "pw"]
