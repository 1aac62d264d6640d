"""Ordered execution of captured viewer input against the headless browser.

Events are executed strictly in arrival order. Consecutive full-value text
updates for the same element collapse to the latest value, and drag gestures
are buffered from their start marker to their end marker before being played
as one interpolated pointer gesture. A capture is taken only after the queue
has stayed quiet for the configured quiescence window and the page reports
itself settled.
"""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass, field
from typing import Callable

from .driver import (
    DriverSession,
    HistoryEmpty,
    NavigationFailed,
    PageSnapshot,
    StaleElement,
)
from .wire import DragPhase, InputEvent, InputKind

logger = logging.getLogger(__name__)

DEFAULT_QUIESCENCE_MS = 200


class QueueClosed(Exception):
    """The session is ending; no further events are accepted."""


class ReplayQueue:
    """FIFO between the network receiver (producer) and the session loop
    (consumer). Thread-safe for that one-producer one-consumer pair."""

    def __init__(self, quiescence_ms: int = DEFAULT_QUIESCENCE_MS) -> None:
        self.quiescence_ms = quiescence_ms
        self._items: list[InputEvent] = []
        self._lock = threading.Lock()
        self._ready = threading.Condition(self._lock)
        self._closed = False
        self.submitted = 0

    def submit(self, event: InputEvent) -> None:
        with self._ready:
            if self._closed:
                raise QueueClosed("replay queue is closed")
            if (
                event.kind in (InputKind.TEXT_CHANGED, InputKind.PASTE)
                and self._items
                and self._items[-1].kind == event.kind
                and self._items[-1].element_id == event.element_id
            ):
                # Full-value semantics make older pending values dead weight.
                self._items[-1] = event
            else:
                self._items.append(event)
            self.submitted += 1
            self._ready.notify()

    def take(self, timeout_s: float | None) -> InputEvent | None:
        with self._ready:
            if not self._items:
                self._ready.wait(timeout=timeout_s)
            if not self._items:
                return None
            return self._items.pop(0)

    def pending(self) -> int:
        with self._lock:
            return len(self._items)

    def close(self) -> None:
        with self._ready:
            self._closed = True
            self._ready.notify_all()

    @property
    def closed(self) -> bool:
        return self._closed


@dataclass
class DrainResult:
    snapshot: PageSnapshot
    executed: list[InputEvent] = field(default_factory=list)


class ReplayEngine:
    """Executes events for one session; confined to the session loop thread."""

    def __init__(
        self,
        session: DriverSession,
        queue: ReplayQueue,
        resolve_url: Callable[[str], str],
        reextract: Callable[[], None] | None = None,
    ) -> None:
        self.session = session
        self.queue = queue
        self.resolve_url = resolve_url
        self.reextract = reextract
        self.last_executed_seq = 0
        self._drag_run: list[InputEvent] = []
        self._key_run: list[str] = []

    # -- single-event execution --------------------------------------------------

    def _flush_keys(self) -> None:
        if self._key_run:
            self.session.inject_keys(self._key_run)
            self._key_run = []

    def _flush_drag(self) -> None:
        if not self._drag_run:
            return
        first, last = self._drag_run[0], self._drag_run[-1]
        self._drag_run = []
        self.session.inject_drag(first.x, first.y, last.x, last.y)

    def _execute(self, event: InputEvent) -> None:
        kind = event.kind
        if kind is not InputKind.KEY_PRESS:
            self._flush_keys()
        if kind is not InputKind.DRAG_MOVE:
            self._flush_drag()

        if kind is InputKind.CLICK:
            self.session.inject_click(event.x, event.y)
        elif kind is InputKind.KEY_PRESS:
            self._key_run.append(event.key)
        elif kind in (InputKind.TEXT_CHANGED, InputKind.PASTE):
            self._set_text_with_retry(event)
        elif kind is InputKind.SCROLL:
            self.session.inject_scroll(event.x, event.y)
        elif kind is InputKind.NAVIGATE:
            try:
                self.session.navigate(self.resolve_url(event.url))
            except NavigationFailed as exc:
                # an unreachable target leaves the page as-is; the session
                # must survive a dead link
                logger.warning("navigation dropped: %s", exc)
        elif kind is InputKind.HISTORY_BACK:
            try:
                self.session.history_back()
            except HistoryEmpty:
                logger.warning("history back at depth 0 dropped")
        elif kind is InputKind.HISTORY_FORWARD:
            try:
                self.session.history_forward()
            except HistoryEmpty:
                logger.warning("history forward at depth 0 dropped")
        elif kind is InputKind.DRAG_MOVE:
            self._drag_run.append(event)
            if event.phase is DragPhase.END:
                self._flush_drag()

        self.last_executed_seq += 1

    def _set_text_with_retry(self, event: InputEvent) -> None:
        try:
            self.session.set_element_text(event.element_id, event.text)
        except StaleElement:
            if self.reextract is not None:
                self.reextract()
                try:
                    self.session.set_element_text(event.element_id, event.text)
                    return
                except StaleElement:
                    pass
            logger.warning(
                "dropping %s for stale element %s", event.kind.value, event.element_id
            )

    # -- the drain cycle -----------------------------------------------------------

    def drain_and_capture(
        self,
        wait_first_s: float | None = None,
        force: bool = False,
    ) -> DrainResult | None:
        """Executes queued events until the queue stays quiet for the
        quiescence window, then captures one settled snapshot.

        Without ``force``, blocks up to ``wait_first_s`` for a first event and
        returns None if nothing arrives (idle tick). With ``force`` a capture
        happens even with no events (used for the session's first view).
        """
        executed: list[InputEvent] = []
        if not force:
            first = self.queue.take(wait_first_s)
            if first is None:
                return None
            self._execute(first)
            executed.append(first)

        quiescence_s = self.queue.quiescence_ms / 1000.0
        while True:
            event = self.queue.take(quiescence_s)
            if event is None:
                self._flush_keys()
                self._flush_drag()
                self.session.wait_ready()
                if self.queue.pending() == 0:
                    break
                continue
            self._execute(event)
            executed.append(event)

        started = time.monotonic()
        snapshot = self.session.capture_snapshot()
        logger.debug(
            "captured after %d events in %.1fms",
            len(executed),
            (time.monotonic() - started) * 1e3,
        )
        return DrainResult(snapshot=snapshot, executed=executed)
