"""Browser-driver tests against the bundled page engine and fixture corpus."""

import io

import pytest
from PIL import Image

from mirrorcast.driver import (
    BrowserConfig,
    DriverUnreachable,
    HistoryEmpty,
    NavigationFailed,
    StaleElement,
    Viewport,
    open_session,
)

VIEWPORT = Viewport(1280, 720)


def focus_and_type(session, element_id: str, keys):
    session.execute_script(
        f"document.getElementById('{element_id}').focus(); return true;"
    )
    session.inject_keys(list(keys))


def field_value(session, element_id: str) -> str:
    return session.execute_script(
        f"return document.getElementById('{element_id}').value;"
    )


# --- open -------------------------------------------------------------------


def test_open_lands_on_fixture(static_site, browser_at):
    session = browser_at(static_site.url)
    assert session.title() == "Fixture One"
    assert session.current_url().startswith(static_site.url)


def test_open_unreachable_driver_endpoint():
    with pytest.raises(DriverUnreachable):
        open_session(
            "http://127.0.0.1:1/",
            VIEWPORT,
            config=BrowserConfig(endpoint="http://127.0.0.1:1", connect_timeout_s=1.0),
        )


def test_open_unreachable_origin_fails_navigation():
    with pytest.raises(NavigationFailed):
        open_session("http://127.0.0.1:9/", VIEWPORT)


# --- clicks -----------------------------------------------------------------


def test_click_on_link_navigates(static_site, browser_at):
    session = browser_at(static_site.url)
    rect = session.execute_script(
        "var el = document.querySelector('a.tile');"
        "var r = el.getBoundingClientRect();"
        "return [r.left + window.scrollX, r.top + window.scrollY, r.width, r.height];"
    )
    session.inject_click(int(rect[0] + rect[2] / 2), int(rect[1] + rect[3] / 2))
    assert session.current_url().endswith("/p/alpha.html")
    assert session.title() == "Page alpha"


def test_click_at_origin_of_empty_page_is_inert(static_site, browser_at):
    session = browser_at(static_site.url + "p/alpha.html")
    before = session.current_url()
    session.inject_click(0, 0)
    assert session.current_url() == before


def test_click_example_coordinates(login_site, browser_at):
    # A click at an arbitrary empty point lands on the page without error.
    session = browser_at(login_site.url)
    session.inject_click(52, 142)
    assert session.current_url().startswith(login_site.url)


# --- keys -------------------------------------------------------------------


def test_keys_type_into_focused_field(login_site, browser_at):
    session = browser_at(login_site.url)
    focus_and_type(session, "username", ["J", "o", "h", "n"])
    assert field_value(session, "username") == "John"


def test_empty_key_list_is_noop(login_site, browser_at):
    session = browser_at(login_site.url)
    focus_and_type(session, "username", [])
    assert field_value(session, "username") == ""


def test_enter_submits_fixture_form(login_site, browser_at):
    session = browser_at(login_site.url)
    focus_and_type(session, "username", list("ada"))
    focus_and_type(session, "password", list("pw"))
    session.inject_keys(["Enter"])
    assert "/welcome.html" in session.current_url()


def test_backspace_edits_field(login_site, browser_at):
    session = browser_at(login_site.url)
    focus_and_type(session, "username", ["a", "b", "Backspace", "c"])
    assert field_value(session, "username") == "ac"


# --- element text -----------------------------------------------------------


def seed_registry(session, element_id: str, handle: str = "e1"):
    session.execute_script(
        "window.__mcState = window.__mcState || { els: {} };"
        "window.__mcState.els = window.__mcState.els || {};"
        f"window.__mcState.els['{handle}'] = document.getElementById('{element_id}');"
        "return true;"
    )


def test_set_element_text_sets_value_and_fires_input(login_site, browser_at):
    session = browser_at(login_site.url)
    seed_registry(session, "username")
    session.set_element_text("e1", "hello")
    assert field_value(session, "username") == "hello"
    log = session.execute_script("return window.__fixtureLog;")
    assert {"type": "input", "id": "username", "value": "hello"} in log


def test_set_element_text_empty_clears(login_site, browser_at):
    session = browser_at(login_site.url)
    seed_registry(session, "username")
    session.set_element_text("e1", "seed")
    session.set_element_text("e1", "")
    assert field_value(session, "username") == ""


def test_stale_handle_after_navigation(login_site, browser_at):
    session = browser_at(login_site.url)
    seed_registry(session, "username")
    session.navigate(login_site.url + "about.html")
    with pytest.raises(StaleElement):
        session.set_element_text("e1", "x")


# --- drag --------------------------------------------------------------------


def test_drag_slider_to_midpoint(slider_site, browser_at):
    session = browser_at(slider_site.url)
    # slider track occupies x in [100, 500) at y ~110
    session.inject_drag(102, 110, 300, 110)
    value = int(field_value(session, "slider"))
    assert abs(value - 50) <= 1
    shown = session.execute_script(
        "return document.getElementById('sliderval').textContent;"
    )
    assert shown == str(value)


def test_zero_length_drag_acts_as_click(static_site, browser_at):
    session = browser_at(static_site.url)
    rect = session.execute_script(
        "var r = document.querySelector('a.tile').getBoundingClientRect();"
        "return [r.left + window.scrollX, r.top + window.scrollY, r.width, r.height];"
    )
    x = int(rect[0] + rect[2] / 2)
    y = int(rect[1] + rect[3] / 2)
    session.inject_drag(x, y, x, y)
    assert session.current_url().endswith("/p/alpha.html")


def test_drag_scroll_thumb_scrolls_page(slider_site, browser_at):
    session = browser_at(slider_site.url)
    assert session.execute_script("return window.scrollY;") == 0
    session.inject_drag(1220, 120, 1220, 260)
    assert session.execute_script("return window.scrollY;") > 0


# --- navigation and history ---------------------------------------------------


def test_history_back_and_forward(multipage_site, browser_at):
    session = browser_at(multipage_site.url)
    session.navigate(multipage_site.url + "a.html")
    session.navigate(multipage_site.url + "b.html")
    assert session.history_depth() == (2, 0)

    session.history_back()
    assert session.current_url().endswith("/a.html")
    session.history_back()
    assert session.current_url().rstrip("/") == multipage_site.url.rstrip("/")
    assert session.history_depth() == (0, 2)

    session.history_forward()
    assert session.current_url().endswith("/a.html")


def test_history_back_at_depth_zero_raises(multipage_site, browser_at):
    session = browser_at(multipage_site.url)
    with pytest.raises(HistoryEmpty):
        session.history_back()
    with pytest.raises(HistoryEmpty):
        session.history_forward()


def test_click_navigation_counts_in_history(multipage_site, browser_at):
    session = browser_at(multipage_site.url)
    rect = session.execute_script(
        "var links = document.querySelectorAll('a');"
        "var r = links[0].getBoundingClientRect();"
        "return [r.left + window.scrollX, r.top + window.scrollY, r.width, r.height];"
    )
    session.inject_click(int(rect[0] + 2), int(rect[1] + 2))
    session.capture_snapshot()  # sync point
    assert session.history_depth() == (1, 0)
    session.history_back()
    assert session.current_url().rstrip("/") == multipage_site.url.rstrip("/")


# --- capture -------------------------------------------------------------------


def test_capture_full_page_dimensions(tall_site, browser_at):
    session = browser_at(tall_site.url)
    snapshot = session.capture_snapshot()
    assert (snapshot.image_width, snapshot.image_height) == (1280, 3000)
    assert snapshot.title == "Tall Fixture 測試"


def test_capture_blank_page(browser_at):
    session = browser_at("about:blank")
    snapshot = session.capture_snapshot()
    assert snapshot.title == ""
    assert snapshot.image_width >= VIEWPORT.width
    assert snapshot.screenshot.startswith(b"\x89PNG")


def test_capture_reads_title_and_favicon(static_site, browser_at):
    session = browser_at(static_site.url)
    snapshot = session.capture_snapshot()
    assert snapshot.title == "Fixture One"
    assert snapshot.favicon_url == static_site.url + "favicon.ico"
    assert snapshot.current_url.startswith(static_site.url)


def test_capture_never_narrower_than_viewport(login_site, browser_at):
    session = browser_at(login_site.url)
    snapshot = session.capture_snapshot()
    assert snapshot.image_width >= VIEWPORT.width


def test_stitched_capture_matches_native_full_capture(tall_site, browser_at):
    session = browser_at(tall_site.url)
    native = session.capture_snapshot()
    session.force_stitch = True
    stitched = session.capture_snapshot()
    a = Image.open(io.BytesIO(native.screenshot)).convert("RGB")
    b = Image.open(io.BytesIO(stitched.screenshot)).convert("RGB")
    assert a.size == b.size == (1280, 3000)
    assert a.tobytes() == b.tobytes()


def test_ad_block_capability_blocks_listed_resources(site_servers, browser_at):
    ads = site_servers["extra_ads"]
    with_ads = browser_at(ads.url)
    assert with_ads.execute_script(
        "return document.getElementById('adslot').textContent;"
    ) == "BUY NOW"
    blocked = browser_at(ads.url, ad_block=True)
    assert blocked.execute_script(
        "return document.getElementById('adslot').textContent;"
    ) == ""


def test_close_reaps_browser_process(static_site):
    session = open_session(static_site.url, VIEWPORT)
    process = session.process.process
    assert process.poll() is None
    session.close()
    assert process.poll() is not None
