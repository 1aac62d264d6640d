"""Synchronous scripted client speaking the two-channel wire protocol.

This is the programmatic stand-in for the browser viewer: the audit harness
drives mirrored sessions with it, and the test suite uses it to exercise the
gateway without the graphical client. It performs the same bootstrap dance a
real viewer does (fetch the page, read the pairing token, open both sockets,
announce the viewport).
"""

from __future__ import annotations

import re
import time

import httpx
from websockets.exceptions import WebSocketException
from websockets.sync.client import connect as ws_connect

from . import wire

TOKEN_RE = re.compile(r'name="mirrorcast-token" content="([^"]+)"')


class ClientError(Exception):
    pass


class MirrorClient:
    def __init__(
        self,
        base_url: str,
        initial_path: str = "/",
        viewport: tuple[int, int] = (1280, 720),
        timeout_s: float = 20.0,
    ) -> None:
        self.base_url = base_url.rstrip("/")
        self.timeout_s = timeout_s
        self._out = wire.SequenceAllocator()
        self._cmd_in = wire.SequenceTracker()
        self._assembler = wire.ViewAssembler()
        self.views: list[wire.EnrichedView] = []
        self.session_id = ""
        self.errors: list[wire.ErrorNotice] = []

        page = httpx.get(self.base_url + initial_path, timeout=timeout_s)
        match = TOKEN_RE.search(page.text)
        if not match:
            raise ClientError(f"no pairing token in bootstrap page for {initial_path}")
        token = match.group(1)

        ws_base = "ws" + self.base_url[len("http"):]
        self.view_ws = ws_connect(f"{ws_base}/__ws/view?t={token}", max_size=64 * 1024 * 1024)
        self.cmd_ws = ws_connect(f"{ws_base}/__ws/cmd?t={token}")
        self._send(
            wire.MessageKind.HELLO,
            wire.Hello(
                viewport_width=viewport[0],
                viewport_height=viewport[1],
                initial_path=initial_path,
            ),
        )
        self._await_ready()

    # -- plumbing ----------------------------------------------------------------

    def _send(self, kind: wire.MessageKind, body) -> None:
        message = wire.WireMessage(wire.Channel.COMMAND, kind, self._out.take(), body)
        frame, _ = wire.encode(message)
        try:
            self.cmd_ws.send(frame.decode("utf-8"))
        except (WebSocketException, OSError) as exc:
            raise ClientError(f"command channel closed: {exc}") from exc

    def _recv_cmd(self, timeout_s: float) -> wire.WireMessage | None:
        try:
            data = self.cmd_ws.recv(timeout=timeout_s)
        except TimeoutError:
            return None
        except (WebSocketException, OSError) as exc:
            raise ClientError(f"command channel closed: {exc}") from exc
        frame = data.encode("utf-8") if isinstance(data, str) else data
        message = wire.decode(
            frame,
            wire.FrameType.TEXT if isinstance(data, str) else wire.FrameType.BINARY,
        )
        self._cmd_in.observe(message.sequence)
        if message.kind is wire.MessageKind.ERROR:
            self.errors.append(message.body)
        return message

    def _await_ready(self) -> None:
        deadline = time.monotonic() + self.timeout_s
        while time.monotonic() < deadline:
            message = self._recv_cmd(timeout_s=0.5)
            if message is None:
                continue
            if message.kind is wire.MessageKind.READY:
                self.session_id = message.body.session_id
                return
            if message.kind is wire.MessageKind.ERROR:
                raise ClientError(f"session refused: {message.body.message}")
        raise ClientError("no ready message from server")

    def next_view(self, timeout_s: float | None = None) -> wire.EnrichedView:
        """Blocks until the next complete view arrives."""
        deadline = time.monotonic() + (timeout_s or self.timeout_s)
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                self._drain_errors()
                raise ClientError("timed out waiting for a view")
            try:
                data = self.view_ws.recv(timeout=min(remaining, 0.5))
            except TimeoutError:
                continue
            except (WebSocketException, OSError) as exc:
                raise ClientError(f"view channel closed: {exc}") from exc
            frame = data.encode("utf-8") if isinstance(data, str) else data
            frame_type = wire.FrameType.TEXT if isinstance(data, str) else wire.FrameType.BINARY
            view = self._assembler.feed(wire.decode(frame, frame_type))
            if view is not None:
                self.views.append(view)
                return view

    def _drain_errors(self) -> None:
        try:
            while self._recv_cmd(timeout_s=0.05) is not None:
                pass
        except Exception:
            pass

    @property
    def view(self) -> wire.EnrichedView:
        if not self.views:
            raise ClientError("no view received yet")
        return self.views[-1]

    @property
    def last_image(self) -> bytes | None:
        return self._assembler.last_image

    # -- viewer actions -------------------------------------------------------------

    def _stamp(self) -> int:
        return int(time.time() * 1000)

    def click(self, x: int, y: int) -> None:
        self._send(
            wire.MessageKind.INPUT,
            wire.InputEvent(kind=wire.InputKind.CLICK, x=x, y=y, timestamp_ms=self._stamp()),
        )

    def key(self, key: str) -> None:
        self._send(
            wire.MessageKind.INPUT,
            wire.InputEvent(kind=wire.InputKind.KEY_PRESS, key=key, timestamp_ms=self._stamp()),
        )

    def type_text(self, element_id: str, text: str) -> None:
        self._send(
            wire.MessageKind.INPUT,
            wire.InputEvent(
                kind=wire.InputKind.TEXT_CHANGED,
                element_id=element_id,
                text=text,
                timestamp_ms=self._stamp(),
            ),
        )

    def paste(self, element_id: str, text: str) -> None:
        self._send(
            wire.MessageKind.INPUT,
            wire.InputEvent(
                kind=wire.InputKind.PASTE,
                element_id=element_id,
                text=text,
                timestamp_ms=self._stamp(),
            ),
        )

    def navigate(self, path: str) -> None:
        self._send(
            wire.MessageKind.INPUT,
            wire.InputEvent(kind=wire.InputKind.NAVIGATE, url=path, timestamp_ms=self._stamp()),
        )

    def history_back(self) -> None:
        self._send(
            wire.MessageKind.INPUT,
            wire.InputEvent(kind=wire.InputKind.HISTORY_BACK, timestamp_ms=self._stamp()),
        )

    def history_forward(self) -> None:
        self._send(
            wire.MessageKind.INPUT,
            wire.InputEvent(kind=wire.InputKind.HISTORY_FORWARD, timestamp_ms=self._stamp()),
        )

    def scroll(self, x: int, y: int) -> None:
        self._send(
            wire.MessageKind.INPUT,
            wire.InputEvent(kind=wire.InputKind.SCROLL, x=x, y=y, timestamp_ms=self._stamp()),
        )

    def drag(self, from_xy: tuple[int, int], to_xy: tuple[int, int], samples: int = 3) -> None:
        fx, fy = from_xy
        tx, ty = to_xy
        self._send(
            wire.MessageKind.INPUT,
            wire.InputEvent(
                kind=wire.InputKind.DRAG_MOVE, x=fx, y=fy,
                phase=wire.DragPhase.START, timestamp_ms=self._stamp(),
            ),
        )
        for i in range(1, samples + 1):
            x = round(fx + (tx - fx) * i / (samples + 1))
            y = round(fy + (ty - fy) * i / (samples + 1))
            self._send(
                wire.MessageKind.INPUT,
                wire.InputEvent(
                    kind=wire.InputKind.DRAG_MOVE, x=x, y=y,
                    phase=wire.DragPhase.MOVE, timestamp_ms=self._stamp(),
                ),
            )
        self._send(
            wire.MessageKind.INPUT,
            wire.InputEvent(
                kind=wire.InputKind.DRAG_MOVE, x=tx, y=ty,
                phase=wire.DragPhase.END, timestamp_ms=self._stamp(),
            ),
        )

    # -- helpers -----------------------------------------------------------------------

    def element_by_text(self, text: str, kind: wire.ElementKind | None = None):
        for el in self.view.elements:
            if el.text == text and (kind is None or el.kind is kind):
                return el
        raise ClientError(f"no element with text {text!r} in current view")

    def click_element(self, el: wire.UIElementDescriptor) -> None:
        """Routes exactly like the graphical overlay: links with hrefs become
        navigation events, everything else a coordinate click."""
        if el.kind is wire.ElementKind.HYPERLINK and el.href is not None:
            self.navigate(el.href)
        else:
            self.click(el.x + el.width // 2, el.y + el.height // 2)

    def close(self) -> None:
        for sock in (self.cmd_ws, self.view_ws):
            try:
                sock.close()
            except Exception:
                pass

    def __enter__(self) -> "MirrorClient":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
