"""The outward face of the mirror: HTTP bootstrap, the two WebSocket
channels, session lifecycle, and the wiring between all server modules.

Any non-reserved GET path serves the bootstrap page, so deep links land in
the client and replay onto the mirrored site's matching path. Each paired
view+command connection gets its own browser process, replay loop thread,
composer, and recorder; sessions share nothing but the favicon cache and the
read-only config.
"""

from __future__ import annotations

import asyncio
import logging
import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from urllib.parse import urlsplit

from fastapi import FastAPI, Response, WebSocket, WebSocketDisconnect
from fastapi.responses import HTMLResponse

from . import wire
from .composer import ViewComposer
from .driver import (
    BrowserConfig,
    DriverError,
    DriverSession,
    DriverUnreachable,
    Viewport,
    open_session,
)
from .mimicry import FaviconCache
from .recorder import SessionRecord
from .replay import QueueClosed, ReplayEngine, ReplayQueue

logger = logging.getLogger(__name__)

TOKEN_TTL_S = 60.0
VIEW_WS_PATH = "/__ws/view"
CMD_WS_PATH = "/__ws/cmd"
APP_PREFIX = "/__app/"
ICON_PREFIX = "/__icon/"

MIN_VIEWPORT = Viewport(320, 240)
MAX_VIEWPORT = Viewport(3840, 2160)

BOOTSTRAP_TEMPLATE = """<!doctype html>
<html>
<head>
  <meta charset="utf-8">
  <meta name="viewport" content="width=device-width, initial-scale=1">
  <meta name="mirrorcast-token" content="{token}">
  <title></title>
  <link id="mc-favicon" rel="icon" href="/__icon/blank">
  <style>
    html, body {{ margin: 0; padding: 0; }}
    #mc-root {{ position: relative; }}
    #mc-fallback {{ font: 14px sans-serif; padding: 2em; color: #444; }}
  </style>
</head>
<body>
  <div id="mc-root">
    <noscript><div id="mc-fallback">This page needs JavaScript.</div></noscript>
  </div>
  <script type="module" src="/__app/main.js"></script>
</body>
</html>
"""


@dataclass
class GatewayConfig:
    """Startup configuration; the target URL is the only required setting."""

    target_url: str
    http_port: int = 8080
    viewport_default: Viewport = Viewport(1280, 800)
    quiescence_ms: int = 200
    ad_block: bool = False
    record_screenshots: bool = False
    session_timeout_s: int = 300
    storage_dir: Path = Path("./sessions")
    browser: BrowserConfig = field(default_factory=BrowserConfig)
    dedup: bool = True
    # Test hook for the audit's drop-out classification path.
    fault_unrewritten_links: bool = False
    # Plain HTTP toward the viewer by default; TLS is config-gated and not
    # covered by the acceptance suite.
    tls_certfile: Path | None = None
    tls_keyfile: Path | None = None

    def validate(self) -> None:
        parts = urlsplit(self.target_url)
        if parts.scheme not in ("http", "https") or not parts.netloc:
            raise ValueError(f"target must be an absolute http(s) URL: {self.target_url!r}")
        if not 1 <= self.http_port <= 65535:
            raise ValueError(f"port out of range: {self.http_port}")
        if self.quiescence_ms < 0 or self.session_timeout_s <= 0:
            raise ValueError("timeouts must be positive")


class SessionState:
    """Everything owned by one paired viewer connection."""

    def __init__(self, gateway: "Gateway", token: str) -> None:
        self.gateway = gateway
        self.token = token
        self.session_id = ""
        self.view_ws: WebSocket | None = None
        self.cmd_ws: WebSocket | None = None
        self.loop: asyncio.AbstractEventLoop | None = None
        self.hello: wire.Hello | None = None
        self.hello_event = threading.Event()
        self.queue = ReplayQueue(quiescence_ms=gateway.config.quiescence_ms)
        self.driver: DriverSession | None = None
        self.composer: ViewComposer | None = None
        self.engine: ReplayEngine | None = None
        self.record: SessionRecord | None = None
        self.cmd_out = wire.SequenceAllocator()
        self.cmd_out_lock = threading.Lock()  # shared by loop + session thread
        self.view_out = wire.SequenceAllocator()
        self.cmd_in = wire.SequenceTracker()
        self.last_view_dims: tuple[int, int] | None = None
        self.last_activity = time.monotonic()
        self.closing = threading.Event()
        self.closed = threading.Event()
        self.thread: threading.Thread | None = None
        self.last_error = ""

    # -- channel helpers (called from the session thread) ---------------------------

    def _send_threadsafe(self, coroutine) -> bool:
        if self.loop is None:
            return False
        try:
            asyncio.run_coroutine_threadsafe(coroutine, self.loop).result(timeout=15)
            return True
        except Exception as exc:  # connection gone; the pump will exit
            logger.debug("session %s send failed: %s", self.session_id, exc)
            return False

    def send_view(self, view: wire.EnrichedView) -> bool:
        assert self.view_ws is not None
        for message in wire.view_messages(view, self.view_out):
            frame, frame_type = wire.encode(message)
            if frame_type is wire.FrameType.BINARY:
                ok = self._send_threadsafe(self.view_ws.send_bytes(frame))
            else:
                ok = self._send_threadsafe(self.view_ws.send_text(frame.decode("utf-8")))
            if not ok:
                return False
        self.last_view_dims = (view.image_width, view.image_height)
        return True

    def encode_cmd(self, kind: wire.MessageKind, body) -> str:
        with self.cmd_out_lock:
            sequence = self.cmd_out.take()
        message = wire.WireMessage(wire.Channel.COMMAND, kind, sequence, body)
        frame, _ = wire.encode(message)
        return frame.decode("utf-8")

    def send_cmd(self, kind: wire.MessageKind, body) -> bool:
        """Thread-side command send; never call from the event loop itself."""
        assert self.cmd_ws is not None
        return self._send_threadsafe(self.cmd_ws.send_text(self.encode_cmd(kind, body)))

    # -- ingest (called from the websocket receive task) -----------------------------

    def ingest_frame(self, data: str | bytes) -> None:
        """Decode, validate, record, submit. Raises wire errors upward so the
        receiver can close the session on protocol violations."""
        if isinstance(data, bytes):
            raise wire.MalformedFrame("binary frames are not valid on the command channel")
        message = wire.decode(data.encode("utf-8"), wire.FrameType.TEXT)
        self.cmd_in.observe(message.sequence)
        if message.kind is wire.MessageKind.HELLO:
            if self.hello is not None:
                raise wire.MalformedFrame("duplicate hello")
            hello: wire.Hello = message.body
            self.hello = wire.Hello(
                viewport_width=min(max(hello.viewport_width, MIN_VIEWPORT.width), MAX_VIEWPORT.width),
                viewport_height=min(max(hello.viewport_height, MIN_VIEWPORT.height), MAX_VIEWPORT.height),
                initial_path=hello.initial_path,
            )
            self.hello_event.set()
            return
        if message.kind is not wire.MessageKind.INPUT:
            raise wire.MalformedFrame(f"client sent server-only kind {message.kind.value}")
        if self.hello is None:
            raise wire.MalformedFrame("input before hello")
        event: wire.InputEvent = message.body
        if not self._in_bounds(event):
            logger.warning("dropping out-of-bounds %s", event.kind.value)
            return
        self.last_activity = time.monotonic()
        if self.record is not None:
            self.record.record_event(int(time.time() * 1000), event)
        try:
            self.queue.submit(event)
        except QueueClosed:
            pass

    def _in_bounds(self, event: wire.InputEvent) -> bool:
        if event.x is None or event.y is None:
            return True
        if self.last_view_dims is None:
            return True
        width, height = self.last_view_dims
        return 0 <= event.x <= width and 0 <= event.y <= height

    # -- the pump (session thread) -----------------------------------------------------

    def run(self) -> None:
        config = self.gateway.config
        try:
            self._pump(config)
        except Exception as exc:
            self.last_error = str(exc)
            logger.error("session %s crashed: %s", self.session_id or self.token, exc)
        finally:
            self._teardown()

    def _pump(self, config: GatewayConfig) -> None:
        if not self.hello_event.wait(timeout=10) or self.hello is None:
            logger.warning("session %s: no hello, giving up", self.token)
            return

        composer = ViewComposer(
            config.target_url,
            dedup=config.dedup,
            fault_unrewritten_links=config.fault_unrewritten_links,
        )
        self.composer = composer
        initial_url = composer.resolve_proxy_path(self.hello.initial_path)
        viewport = Viewport(self.hello.viewport_width, self.hello.viewport_height)
        try:
            self.driver = open_session(
                initial_url, viewport, ad_block=config.ad_block, config=config.browser
            )
        except (DriverUnreachable, DriverError) as exc:
            logger.error("session %s: browser failed to open: %s", self.token, exc)
            self.send_cmd(
                wire.MessageKind.ERROR,
                wire.ErrorNotice(code="driver-unreachable", message=str(exc)),
            )
            return

        self.record = SessionRecord(
            config.storage_dir, config.target_url, config.record_screenshots
        )
        self.session_id = self.record.session_id
        self.engine = ReplayEngine(
            self.driver,
            self.queue,
            resolve_url=composer.resolve_proxy_path,
            reextract=lambda: composer.extract_elements(self.driver),
        )
        self.send_cmd(wire.MessageKind.READY, wire.Ready(session_id=self.session_id))

        if not self._capture_and_send(force=True):
            return
        while not self.closing.is_set():
            result = self.engine.drain_and_capture(wait_first_s=0.5)
            if result is None:
                idle = time.monotonic() - self.last_activity
                if idle > config.session_timeout_s:
                    logger.info("session %s idle for %.0fs, closing", self.session_id, idle)
                    break
                continue
            if not self._send_composed(result.snapshot):
                break
            self.last_activity = time.monotonic()

        # client gone or timing out: finish whatever was accepted, then leave
        if self.queue.pending() > 0 and self.driver is not None:
            try:
                self.engine.drain_and_capture(wait_first_s=0)
            except DriverError as exc:
                logger.warning("final drain failed: %s", exc)

    def _capture_and_send(self, force: bool) -> bool:
        result = self.engine.drain_and_capture(force=force)
        if result is None:
            return True
        return self._send_composed(result.snapshot)

    def _send_composed(self, snapshot) -> bool:
        assert self.composer is not None and self.driver is not None
        records = self.composer.extract_elements(self.driver)
        favicon_path = self.gateway.favicons.fetch(snapshot.favicon_url)
        view = self.composer.compose(
            snapshot, records, self.driver.history_depth(), favicon_path
        )
        if self.record is not None:
            self.record.record_view(view)
        return self.send_view(view)

    def _teardown(self) -> None:
        self.queue.close()
        if self.record is not None:
            self.record.close()
        if self.driver is not None:
            try:
                self.driver.close()
            except Exception as exc:
                logger.warning("driver close failed: %s", exc)
        for ws in (self.view_ws, self.cmd_ws):
            if ws is not None and self.loop is not None:
                try:
                    asyncio.run_coroutine_threadsafe(ws.close(), self.loop).result(timeout=5)
                except Exception:
                    pass
        self.closed.set()
        self.gateway.forget(self)

    def start_thread(self) -> None:
        self.thread = threading.Thread(target=self.run, name=f"session-{self.token[:8]}", daemon=True)
        self.thread.start()

    def shutdown(self) -> None:
        self.closing.set()
        self.queue.close()


class Gateway:
    """Process-wide state plus the FastAPI application."""

    def __init__(self, config: GatewayConfig) -> None:
        config.validate()
        self.config = config
        self.favicons = FaviconCache()
        self._tokens: dict[str, float] = {}
        self._sessions: dict[str, SessionState] = {}
        self._lock = threading.Lock()
        self.app = self._build_app()

    # -- token pairing -------------------------------------------------------------

    def issue_token(self) -> str:
        token = secrets.token_urlsafe(16)
        now = time.monotonic()
        with self._lock:
            self._tokens[token] = now + TOKEN_TTL_S
            for stale in [t for t, exp in self._tokens.items() if exp < now]:
                del self._tokens[stale]
        return token

    def _valid_token(self, token: str) -> bool:
        with self._lock:
            expiry = self._tokens.get(token)
            return expiry is not None and expiry >= time.monotonic()

    def session_for(self, token: str) -> SessionState | None:
        if not self._valid_token(token):
            return None
        with self._lock:
            state = self._sessions.get(token)
            if state is None:
                state = SessionState(self, token)
                self._sessions[token] = state
            return state

    def forget(self, state: SessionState) -> None:
        with self._lock:
            self._sessions.pop(state.token, None)
            self._tokens.pop(state.token, None)

    def live_sessions(self) -> list[SessionState]:
        with self._lock:
            return list(self._sessions.values())

    def shutdown(self) -> None:
        for state in self.live_sessions():
            state.shutdown()
        for state in self.live_sessions():
            state.closed.wait(timeout=10)

    # -- the application -----------------------------------------------------------

    def _build_app(self) -> FastAPI:
        app = FastAPI(openapi_url=None, docs_url=None, redoc_url=None)
        gateway = self

        @app.websocket(VIEW_WS_PATH)
        async def view_channel(websocket: WebSocket):
            token = websocket.query_params.get("t", "")
            state = gateway.session_for(token)
            if state is None or state.view_ws is not None:
                await websocket.close(code=4403)
                return
            await websocket.accept()
            state.view_ws = websocket
            state.loop = asyncio.get_running_loop()
            gateway._maybe_start(state)
            try:
                while True:
                    # the view channel is server->client; we only watch for close
                    await websocket.receive_text()
            except WebSocketDisconnect:
                pass
            finally:
                state.shutdown()

        @app.websocket(CMD_WS_PATH)
        async def command_channel(websocket: WebSocket):
            token = websocket.query_params.get("t", "")
            state = gateway.session_for(token)
            if state is None or state.cmd_ws is not None:
                await websocket.close(code=4403)
                return
            await websocket.accept()
            state.cmd_ws = websocket
            state.loop = asyncio.get_running_loop()
            gateway._maybe_start(state)
            try:
                while True:
                    data = await websocket.receive()
                    if data.get("type") == "websocket.disconnect":
                        break
                    payload = data.get("text") if data.get("text") is not None else data.get("bytes")
                    try:
                        state.ingest_frame(payload)
                    except wire.UnknownKind as exc:
                        logger.warning("ignoring unknown message kind: %s", exc)
                    except (wire.MalformedFrame, wire.SequenceRegression, wire.InvalidMessage) as exc:
                        logger.warning("protocol violation, closing session: %s", exc)
                        notice = state.encode_cmd(
                            wire.MessageKind.ERROR,
                            wire.ErrorNotice(code="protocol-violation", message=str(exc)),
                        )
                        try:
                            await websocket.send_text(notice)
                        except Exception:
                            pass
                        break
            except WebSocketDisconnect:
                pass
            finally:
                state.shutdown()

        @app.get(ICON_PREFIX + "{name}")
        async def icon(name: str):
            found = gateway.favicons.lookup(name)
            if found is None:
                return Response(status_code=404)
            body, content_type = found
            return Response(content=body, media_type=content_type)

        @app.get(APP_PREFIX + "{asset:path}")
        async def client_asset(asset: str):
            root = client_assets_dir()
            candidate = (root / asset).resolve() if root else None
            if (
                candidate is None
                or not str(candidate).startswith(str(root.resolve()))
                or not candidate.is_file()
            ):
                return Response(status_code=404)
            media = "text/javascript" if candidate.suffix in (".js", ".mjs") else (
                "text/css" if candidate.suffix == ".css" else "application/octet-stream"
            )
            return Response(content=candidate.read_bytes(), media_type=media)

        @app.get("/{path:path}")
        async def bootstrap(path: str):
            if path.startswith("__"):
                return Response(status_code=404)
            token = gateway.issue_token()
            return HTMLResponse(BOOTSTRAP_TEMPLATE.format(token=token))

        return app

    def _maybe_start(self, state: SessionState) -> None:
        if state.view_ws is not None and state.cmd_ws is not None and state.thread is None:
            state.start_thread()


def client_assets_dir() -> Path | None:
    root = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"
    return root if root.is_dir() else None


def serve(config: GatewayConfig) -> None:
    """Runs the gateway until interrupted (the CLI entry point)."""
    import uvicorn

    gateway = Gateway(config)
    kwargs = {}
    if config.tls_certfile and config.tls_keyfile:
        kwargs["ssl_certfile"] = str(config.tls_certfile)
        kwargs["ssl_keyfile"] = str(config.tls_keyfile)
    uvicorn.run(
        gateway.app,
        host="0.0.0.0",
        port=config.http_port,
        log_level="warning",
        **kwargs,
    )


class GatewayHarness:
    """In-process gateway on an ephemeral port, for tests and the auditor."""

    def __init__(self, config: GatewayConfig) -> None:
        import uvicorn

        self.gateway = Gateway(config)
        self._server = uvicorn.Server(
            uvicorn.Config(
                self.gateway.app, host="127.0.0.1", port=0, log_level="warning"
            )
        )
        self._thread = threading.Thread(target=self._server.run, daemon=True)
        self._thread.start()
        deadline = time.monotonic() + 10
        while not self._server.started:
            if time.monotonic() > deadline:
                raise RuntimeError("gateway failed to start")
            time.sleep(0.01)
        self.port = self._server.servers[0].sockets[0].getsockname()[1]
        self.base_url = f"http://127.0.0.1:{self.port}"

    def close(self) -> None:
        self.gateway.shutdown()
        self._server.should_exit = True
        self._thread.join(timeout=10)
