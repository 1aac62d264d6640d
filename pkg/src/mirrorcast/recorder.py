"""Append-only persistence of everything a session produces.

Layout per session under the storage directory:

    <session-id>/
        meta.json            session id, start time, target URL, close time
        events.ndjson        one line per input event: {"ts": ..., "event": {...}}
        views.ndjson         one line per view: sequence, path, title, shot ref
        shots/000007.png     screenshot files named by view sequence

Event lines are fsynced before the replay engine acknowledges the event, so
an accepted action is on disk even if the process dies. A full disk disables
recording loudly but never takes the live session down with it.
"""

from __future__ import annotations

import json
import logging
import os
import time
import uuid
import zipfile
from pathlib import Path

from .wire import EnrichedView, InputEvent

logger = logging.getLogger(__name__)


class RecorderError(Exception):
    pass


class UnknownSession(RecorderError):
    pass


class SessionRecord:
    """Writer side; one per live session, used only by its session loop."""

    def __init__(
        self,
        storage_dir: str | Path,
        target_url: str,
        record_screenshots: bool = False,
    ) -> None:
        self.session_id = uuid.uuid4().hex
        self.started_at = time.time()
        self.target_url = target_url
        self.record_screenshots = record_screenshots
        self.root = Path(storage_dir) / self.session_id
        self.disabled = False
        self.closed = False
        self._event_count = 0
        self._last_shot_ref: str | None = None
        try:
            (self.root / "shots").mkdir(parents=True, exist_ok=True)
            self._write_meta()
            self._events = open(self.root / "events.ndjson", "a", encoding="utf-8")
            self._views = open(self.root / "views.ndjson", "a", encoding="utf-8")
        except OSError as exc:
            self._disable(exc)

    def _write_meta(self) -> None:
        meta = {
            "sessionId": self.session_id,
            "startedAt": self.started_at,
            "targetUrl": self.target_url,
            "recordScreenshots": self.record_screenshots,
            "closedAt": time.time() if self.closed else None,
        }
        tmp = self.root / "meta.json.tmp"
        tmp.write_text(json.dumps(meta, indent=2))
        tmp.replace(self.root / "meta.json")

    def _disable(self, exc: OSError) -> None:
        if not self.disabled:
            logger.error(
                "RECORDING DISABLED for session %s: %s (session continues)",
                self.session_id,
                exc,
            )
        self.disabled = True

    def record_event(self, server_ts_ms: int, event: InputEvent) -> None:
        """Durably appends one event before it is acknowledged."""
        if self.disabled or self.closed:
            return
        line = json.dumps(
            {"ts": server_ts_ms, "event": event.to_body()},
            sort_keys=True,
            ensure_ascii=False,
        )
        try:
            self._events.write(line + "\n")
            self._events.flush()
            os.fsync(self._events.fileno())
            self._event_count += 1
        except (OSError, ValueError) as exc:
            self._disable(exc)

    def record_view(self, view: EnrichedView) -> None:
        if self.disabled or self.closed:
            return
        shot_ref = None
        if self.record_screenshots:
            if view.screenshot is not None:
                shot_ref = f"shots/{view.sequence:06d}.png"
                try:
                    (self.root / shot_ref).write_bytes(view.screenshot)
                except OSError as exc:
                    self._disable(exc)
                    return
                self._last_shot_ref = shot_ref
            else:
                # deduplicated frame: the previous file is still the pixels
                shot_ref = self._last_shot_ref
        line = json.dumps(
            {
                "sequence": view.sequence,
                "displayPath": view.display_path,
                "title": view.page_title,
                "screenshotRef": shot_ref,
            },
            sort_keys=True,
            ensure_ascii=False,
        )
        try:
            self._views.write(line + "\n")
            self._views.flush()
        except (OSError, ValueError) as exc:
            self._disable(exc)

    @property
    def event_count(self) -> int:
        return self._event_count

    def close(self) -> None:
        if self.closed:
            return
        self.closed = True
        for handle in (getattr(self, "_events", None), getattr(self, "_views", None)):
            if handle is not None:
                try:
                    handle.close()
                except OSError:
                    pass
        if not self.disabled:
            try:
                self._write_meta()
            except OSError as exc:
                self._disable(exc)


# -- read side ---------------------------------------------------------------


def _session_root(storage_dir: str | Path, session_id: str) -> Path:
    root = Path(storage_dir) / session_id
    if not (root / "meta.json").is_file():
        raise UnknownSession(f"no recorded session {session_id}")
    return root


def load_meta(storage_dir: str | Path, session_id: str) -> dict:
    return json.loads((_session_root(storage_dir, session_id) / "meta.json").read_text())


def load_events(storage_dir: str | Path, session_id: str) -> list[dict]:
    path = _session_root(storage_dir, session_id) / "events.ndjson"
    if not path.exists():
        return []
    return [json.loads(line) for line in path.read_text().splitlines() if line]


def load_views(storage_dir: str | Path, session_id: str) -> list[dict]:
    path = _session_root(storage_dir, session_id) / "views.ndjson"
    if not path.exists():
        return []
    return [json.loads(line) for line in path.read_text().splitlines() if line]


def export(storage_dir: str | Path, session_id: str) -> Path:
    """Packs a closed session into ``<session-id>.zip`` next to its directory
    and returns the archive path."""
    root = _session_root(storage_dir, session_id)
    meta = load_meta(storage_dir, session_id)
    if meta.get("closedAt") is None:
        raise RecorderError(f"session {session_id} is still open")
    archive_path = Path(storage_dir) / f"{session_id}.zip"
    with zipfile.ZipFile(archive_path, "w", zipfile.ZIP_DEFLATED) as archive:
        for path in sorted(root.rglob("*")):
            if path.is_file():
                archive.write(path, path.relative_to(root))
    return archive_path
