"""Minimal W3C WebDriver client plus lifecycle of the headless page engine.

Each mirroring session owns exactly one browser process and one WebDriver
session inside it, spawned at open and reaped at close. The wire protocol is
spoken directly over HTTP so any conforming driver binary works; by default
the bundled Node page engine is launched.

All origin traffic flows through the controlled browser. This module never
talks to the target site itself.
"""

from __future__ import annotations

import base64
import io
import json
import logging
import os
import shutil
import socket
import struct
import subprocess
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import httpx

logger = logging.getLogger(__name__)

MAX_PAGE_HEIGHT = 16384

# Interpolation profile for drag gestures; dense enough for the usual
# slider-captcha movement samplers.
DRAG_STEPS = 10
DRAG_STEP_PAUSE_MS = 8

# Page-global registry the element extraction script maintains; element
# handles issued to the rest of the system resolve through it.
REGISTRY_GLOBAL = "__mcState"

# UI-events key names -> WebDriver normalized codepoints.
KEY_TO_WIRE = {
    "Enter": "",
    "Tab": "",
    "Backspace": "",
    "Escape": "",
    "Delete": "",
    "ArrowLeft": "",
    "ArrowUp": "",
    "ArrowRight": "",
    "ArrowDown": "",
    "Home": "",
    "End": "",
    "PageUp": "",
    "PageDown": "",
    "Shift": "",
    "Control": "",
    "Alt": "",
}

DEFAULT_AD_BLOCK_PATTERNS = (
    "doubleclick.net",
    "googlesyndication.com",
    "googletagmanager.com",
    "google-analytics.com",
    "adservice.",
    "adsystem",
    "adserver",
    "/ads/",
    "taboola.com",
    "outbrain.com",
)


class DriverError(Exception):
    """Base class for browser-driver failures."""


class DriverUnreachable(DriverError):
    """No WebDriver server is answering at the configured endpoint."""


class NavigationFailed(DriverError):
    """The origin site could not be loaded (DNS, refused, timeout)."""


class StaleSession(DriverError):
    """The browser session is gone; the mirror session must end."""


class StaleElement(DriverError):
    """The element handle no longer resolves; re-extract and retry."""


class CaptureFailed(DriverError):
    """Screenshot or metadata readout failed."""


class HistoryEmpty(DriverError):
    """Back/forward requested at depth zero."""


class ScriptError(DriverError):
    """Injected script raised."""


@dataclass(frozen=True)
class Viewport:
    width: int
    height: int


@dataclass(frozen=True)
class PageSnapshot:
    """Full-page capture plus the live page metadata read with it."""

    screenshot: bytes
    image_width: int
    image_height: int
    title: str
    current_url: str
    favicon_url: str | None


@dataclass
class BrowserConfig:
    """How to reach (or spawn) the WebDriver server.

    ``endpoint`` set: attach to an already-running server and never spawn.
    Otherwise ``launch_command`` is spawned per session; a ``{port}``
    placeholder is substituted with a free port, and without one the bundled
    engine contract applies (``--port 0`` appended, bound port read back as a
    JSON line on stdout).
    """

    endpoint: str | None = None
    launch_command: list[str] | None = None
    ad_block_patterns: tuple[str, ...] = DEFAULT_AD_BLOCK_PATTERNS
    connect_timeout_s: float = 20.0

    def resolved_command(self) -> list[str]:
        if self.launch_command:
            return list(self.launch_command)
        env_cmd = os.environ.get("MIRRORCAST_BROWSER_CMD")
        if env_cmd:
            return env_cmd.split()
        bundled = bundled_engine_path()
        if bundled is None:
            raise DriverUnreachable(
                "no browser configured: set MIRRORCAST_BROWSER_CMD, pass an "
                "endpoint, or run from a checkout with microbrowser/ installed"
            )
        node = shutil.which("node")
        if node is None:
            raise DriverUnreachable("node is required to run the bundled page engine")
        return [node, str(bundled)]


def bundled_engine_path() -> Path | None:
    root = Path(__file__).resolve().parent.parent.parent
    candidate = root / "microbrowser" / "main.js"
    return candidate if candidate.exists() else None


def _free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


class BrowserProcess:
    """One spawned WebDriver server process."""

    def __init__(self, command: list[str], connect_timeout_s: float) -> None:
        self.endpoint = ""
        explicit_port = any("{port}" in part for part in command)
        if explicit_port:
            port = _free_port()
            command = [part.replace("{port}", str(port)) for part in command]
        else:
            command = command + ["--port", "0"]
        try:
            self.process = subprocess.Popen(
                command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
            )
        except OSError as exc:
            raise DriverUnreachable(f"cannot launch browser: {exc}") from exc
        if explicit_port:
            self.endpoint = f"http://127.0.0.1:{port}"
            self._wait_ready(connect_timeout_s)
        else:
            self.endpoint = self._read_port_line(connect_timeout_s)

    def _read_port_line(self, timeout_s: float) -> str:
        assert self.process.stdout is not None
        deadline = time.monotonic() + timeout_s
        line = self.process.stdout.readline()
        if not line or time.monotonic() > deadline:
            self.close()
            raise DriverUnreachable("browser process produced no port line")
        try:
            port = json.loads(line)["port"]
        except (json.JSONDecodeError, KeyError) as exc:
            self.close()
            raise DriverUnreachable(f"bad port line from browser: {line!r}") from exc
        return f"http://127.0.0.1:{port}"

    def _wait_ready(self, timeout_s: float) -> None:
        deadline = time.monotonic() + timeout_s
        while time.monotonic() < deadline:
            try:
                httpx.get(f"{self.endpoint}/status", timeout=2.0)
                return
            except httpx.TransportError:
                time.sleep(0.05)
        self.close()
        raise DriverUnreachable(f"browser at {self.endpoint} never became ready")

    def alive(self) -> bool:
        return self.process.poll() is None

    def close(self) -> None:
        if self.process.poll() is None:
            self.process.terminate()
            try:
                self.process.wait(timeout=3)
            except subprocess.TimeoutExpired:
                self.process.kill()
                self.process.wait(timeout=3)
        # release the pipes so the interpreter does not hold fds
        for stream in (self.process.stdin, self.process.stdout):
            if stream:
                try:
                    stream.close()
                except OSError:
                    pass


def _png_dimensions(png: bytes) -> tuple[int, int]:
    if len(png) < 24 or png[:8] != b"\x89PNG\r\n\x1a\n":
        raise CaptureFailed("screenshot is not a PNG")
    width, height = struct.unpack(">II", png[16:24])
    return width, height


class DriverSession:
    """One headless browser under control; operations are not thread-safe and
    must stay confined to the owning session loop."""

    def __init__(
        self,
        endpoint: str,
        session_handle: str,
        viewport: Viewport,
        process: BrowserProcess | None,
        http: httpx.Client,
    ) -> None:
        self.endpoint = endpoint
        self.session_handle = session_handle
        self.viewport = viewport
        self.process = process
        self.http = http
        self.history: list[str] = []
        self.history_index = -1
        self.force_stitch = False
        self._closed = False

    # -- low-level wire ------------------------------------------------------

    def _cmd(self, method: str, path: str, body: dict | None = None) -> Any:
        url = f"{self.endpoint}/session/{self.session_handle}{path}"
        try:
            response = self.http.request(
                method, url, json=body if body is not None else ({} if method == "POST" else None)
            )
        except httpx.TransportError as exc:
            raise StaleSession(f"browser connection lost: {exc}") from exc
        try:
            payload = response.json()
        except json.JSONDecodeError as exc:
            raise StaleSession(f"non-webdriver reply from browser: {exc}") from exc
        if response.status_code == 200:
            return payload.get("value")
        value = payload.get("value") or {}
        code = value.get("error", "unknown error")
        message = value.get("message", "")
        if code == "invalid session id":
            raise StaleSession(message)
        if code == "stale element reference":
            raise StaleElement(message)
        if code == "javascript error":
            raise ScriptError(message)
        if "navigation" in message or code == "timeout":
            raise NavigationFailed(message)
        raise DriverError(f"{code}: {message}")

    def execute_script(self, script: str, args: list | None = None) -> Any:
        return self._cmd("POST", "/execute/sync", {"script": script, "args": args or []})

    # -- navigation ----------------------------------------------------------

    def navigate(self, url: str) -> None:
        self._cmd("POST", "/url", {"url": url})
        current = self.current_url()
        self.history = self.history[: self.history_index + 1]
        self.history.append(current)
        self.history_index = len(self.history) - 1

    def history_depth(self) -> tuple[int, int]:
        back = max(0, self.history_index)
        forward = max(0, len(self.history) - self.history_index - 1)
        return back, forward

    def history_back(self) -> None:
        if self.history_index <= 0:
            raise HistoryEmpty("no earlier history entry")
        self._cmd("POST", "/back")
        self.history_index -= 1

    def history_forward(self) -> None:
        if self.history_index >= len(self.history) - 1:
            raise HistoryEmpty("no later history entry")
        self._cmd("POST", "/forward")
        self.history_index += 1

    def _sync_history(self, current: str) -> None:
        if self.history_index >= 0 and self.history[self.history_index] == current:
            return
        # The page moved without an explicit navigate (link click, form
        # submit, redirect): account for it as a push.
        self.history = self.history[: self.history_index + 1]
        self.history.append(current)
        self.history_index = len(self.history) - 1

    def current_url(self) -> str:
        return self._cmd("GET", "/url") or ""

    def title(self) -> str:
        return self._cmd("GET", "/title") or ""

    # -- input ----------------------------------------------------------------

    def _scroll_offsets(self) -> tuple[int, int]:
        pair = self.execute_script("return [window.scrollX, window.scrollY];")
        return int(pair[0]), int(pair[1])

    def _ensure_visible(self, y: int) -> tuple[int, int]:
        """Scrolls the document point into the live viewport; returns offsets."""
        sx, sy = self._scroll_offsets()
        if not sy <= y < sy + self.viewport.height:
            target = max(0, y - self.viewport.height // 2)
            self.execute_script("window.scrollTo(arguments[0], arguments[1]);", [0, target])
            sx, sy = self._scroll_offsets()
        return sx, sy

    def inject_click(self, x: int, y: int) -> None:
        sx, sy = self._ensure_visible(y)
        self._cmd(
            "POST",
            "/actions",
            {
                "actions": [
                    {
                        "type": "pointer",
                        "id": "mouse",
                        "parameters": {"pointerType": "mouse"},
                        "actions": [
                            {"type": "pointerMove", "x": x - sx, "y": y - sy, "duration": 0},
                            {"type": "pointerDown", "button": 0},
                            {"type": "pointerUp", "button": 0},
                        ],
                    }
                ]
            },
        )

    def inject_keys(self, keys: list[str]) -> None:
        if not keys:
            return
        actions = []
        for key in keys:
            value = KEY_TO_WIRE.get(key, key)
            actions.append({"type": "keyDown", "value": value})
            actions.append({"type": "keyUp", "value": value})
        self._cmd(
            "POST",
            "/actions",
            {"actions": [{"type": "key", "id": "kbd", "actions": actions}]},
        )

    def inject_drag(self, from_x: int, from_y: int, to_x: int, to_y: int) -> None:
        sx, sy = self._ensure_visible(min(from_y, to_y))
        steps = [
            {"type": "pointerMove", "x": from_x - sx, "y": from_y - sy, "duration": 0},
            {"type": "pointerDown", "button": 0},
        ]
        for i in range(1, DRAG_STEPS + 1):
            steps.append({"type": "pause", "duration": DRAG_STEP_PAUSE_MS})
            steps.append(
                {
                    "type": "pointerMove",
                    "x": round(from_x + (to_x - from_x) * i / DRAG_STEPS) - sx,
                    "y": round(from_y + (to_y - from_y) * i / DRAG_STEPS) - sy,
                    "duration": 0,
                }
            )
        steps.append({"type": "pointerUp", "button": 0})
        self._cmd(
            "POST",
            "/actions",
            {
                "actions": [
                    {
                        "type": "pointer",
                        "id": "mouse",
                        "parameters": {"pointerType": "mouse"},
                        "actions": steps,
                    }
                ]
            },
        )

    def inject_scroll(self, x: int, y: int) -> None:
        self.execute_script("window.scrollTo(arguments[0], arguments[1]);", [x, y])

    def set_element_text(self, element_id: str, text: str) -> None:
        """Sets the full value of a previously extracted element and fires an
        input event so page scripts react, mirroring a paste."""
        result = self.execute_script(
            "var state = window." + REGISTRY_GLOBAL + ";"
            "var el = state && state.els && state.els[arguments[0]];"
            "if (!el || !el.isConnected) { return '__stale__'; }"
            "el.focus();"
            "el.value = arguments[1];"
            "el.dispatchEvent(new InputEvent('input', {bubbles: true}));"
            "return 'ok';",
            [element_id, text],
        )
        if result == "__stale__":
            raise StaleElement(f"element handle {element_id} no longer resolves")

    # -- capture ----------------------------------------------------------------

    def wait_ready(self, timeout_s: float = 5.0) -> None:
        deadline = time.monotonic() + timeout_s
        while time.monotonic() < deadline:
            try:
                state = self.execute_script("return document.readyState;")
            except ScriptError:
                state = None
            if state in ("interactive", "complete"):
                return
            time.sleep(0.02)

    def full_page_height(self) -> int:
        value = self.execute_script(
            "return Math.max(document.documentElement.scrollHeight,"
            " document.body ? document.body.scrollHeight : 0);"
        )
        return int(value or 0)

    def _full_screenshot(self) -> bytes:
        if not self.force_stitch:
            for path in ("/screenshot/full", "/moz/screenshot/full"):
                try:
                    data = self._cmd("GET", path)
                    if data:
                        return base64.b64decode(data)
                except (DriverError, StaleElement):
                    continue
                except StaleSession:
                    raise
        return self._stitched_screenshot()

    def _stitched_screenshot(self) -> bytes:
        """Viewport captures stitched by scrolling; works on any W3C driver."""
        from PIL import Image

        total_height = min(self.full_page_height(), MAX_PAGE_HEIGHT)
        total_height = max(total_height, self.viewport.height)
        original_x, original_y = self._scroll_offsets()
        canvas = None
        y = 0
        while y < total_height:
            self.execute_script("window.scrollTo(0, arguments[0]);", [y])
            data = self._cmd("GET", "/screenshot")
            if not data:
                raise CaptureFailed("empty viewport screenshot")
            tile = Image.open(io.BytesIO(base64.b64decode(data))).convert("RGB")
            if canvas is None:
                canvas = Image.new("RGB", (tile.width, total_height), "white")
            _, actual_y = self._scroll_offsets()
            canvas.paste(tile, (0, actual_y))
            if actual_y + tile.height >= total_height:
                break
            y = actual_y + tile.height
        self.execute_script("window.scrollTo(arguments[0], arguments[1]);", [original_x, original_y])
        if canvas is None:
            raise CaptureFailed("no screenshot tiles captured")
        out = io.BytesIO()
        canvas.save(out, format="PNG", compress_level=1)
        return out.getvalue()

    def capture_snapshot(self) -> PageSnapshot:
        self.wait_ready()
        try:
            png = self._full_screenshot()
        except (DriverError, ValueError) as exc:
            if isinstance(exc, StaleSession):
                raise
            raise CaptureFailed(f"screenshot failed: {exc}") from exc
        width, height = _png_dimensions(png)
        if height > MAX_PAGE_HEIGHT:
            from PIL import Image

            img = Image.open(io.BytesIO(png))
            img = img.crop((0, 0, width, MAX_PAGE_HEIGHT))
            out = io.BytesIO()
            img.save(out, format="PNG", compress_level=1)
            png = out.getvalue()
            height = MAX_PAGE_HEIGHT
        title = self.title()
        current = self.current_url()
        favicon = self.execute_script(
            "var links = document.querySelectorAll('link[rel~=\"icon\"]');"
            "for (var i = 0; i < links.length; i++) {"
            "  if (links[i].href) { return links[i].href; }"
            "}"
            "return null;"
        )
        self._sync_history(current)
        return PageSnapshot(
            screenshot=png,
            image_width=width,
            image_height=height,
            title=title,
            current_url=current,
            favicon_url=favicon,
        )

    def read_console(self) -> list[dict]:
        """Engine-collected console/CSP entries; empty where unsupported."""
        try:
            entries = self._cmd("GET", "/console")
        except DriverError:
            return []
        return entries or []

    # -- lifecycle ----------------------------------------------------------------

    def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        try:
            self._cmd("DELETE", "")
        except DriverError:
            pass
        self.http.close()
        if self.process is not None:
            self.process.close()

    def __enter__(self) -> "DriverSession":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def open_session(
    target_url: str,
    viewport: Viewport,
    ad_block: bool = False,
    config: BrowserConfig | None = None,
) -> DriverSession:
    """Spawns (or attaches to) a browser, opens one session, navigates it to
    the target, and hands back the controlling DriverSession."""
    config = config or BrowserConfig()
    process: BrowserProcess | None = None
    if config.endpoint:
        endpoint = config.endpoint.rstrip("/")
    else:
        process = BrowserProcess(config.resolved_command(), config.connect_timeout_s)
        endpoint = process.endpoint

    http = httpx.Client(timeout=httpx.Timeout(30.0, connect=config.connect_timeout_s))
    capabilities: dict[str, Any] = {
        "mb:viewport": {"width": viewport.width, "height": viewport.height},
    }
    if ad_block:
        capabilities["mb:blockList"] = list(config.ad_block_patterns)
    try:
        response = http.post(
            f"{endpoint}/session",
            json={"capabilities": {"alwaysMatch": capabilities}},
        )
        payload = response.json()
        if response.status_code != 200:
            raise DriverUnreachable(
                f"session create failed: {payload.get('value', {}).get('message')}"
            )
        value = payload["value"]
        handle = value.get("sessionId") or value.get("session_id")
    except httpx.TransportError as exc:
        http.close()
        if process:
            process.close()
        raise DriverUnreachable(f"no WebDriver server at {endpoint}: {exc}") from exc
    except (KeyError, json.JSONDecodeError) as exc:
        http.close()
        if process:
            process.close()
        raise DriverUnreachable(f"bad session-create reply: {exc}") from exc

    session = DriverSession(endpoint, handle, viewport, process, http)
    try:
        session._cmd(
            "POST", "/window/rect", {"width": viewport.width, "height": viewport.height}
        )
        session.navigate(target_url)
    except DriverError:
        session.close()
        raise
    return session
