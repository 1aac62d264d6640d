"""Turns page snapshots plus live DOM state into enriched views.

Extraction runs one injected script per cycle that walks the page's
interactive elements and reports geometry in full-page CSS pixels, assigning
each element a handle that stays stable for the lifetime of the page.
Hyperlink targets are rewritten to proxy-local paths: same-origin URLs keep
their path and query, everything else is carried on a reserved reversible
path so no click can escape the mirror. Unchanged frames are deduplicated by
content hash.
"""

from __future__ import annotations

import base64
import hashlib
import logging
from urllib.parse import urlsplit, urlunsplit

from .driver import DriverSession, PageSnapshot, ScriptError, StaleSession
from .wire import ElementKind, EnrichedView, UIElementDescriptor

logger = logging.getLogger(__name__)

CROSS_ORIGIN_PREFIX = "/__x/"

TEXT_INPUT_TYPES = {"text", "password", "email", "search", "url", "tel", "number"}
BUTTON_INPUT_TYPES = {"submit", "button", "reset", "image"}

# ES5 on purpose: this runs inside whatever browser backs the session.
EXTRACTION_SCRIPT = """
var state = window.__mcState;
if (!state) {
  state = window.__mcState = { nextId: 1, ids: null, els: {} };
  try { state.ids = new WeakMap(); } catch (e) { state.ids = null; }
}
function handleFor(el) {
  var id = state.ids ? state.ids.get(el) : el.__mcId;
  if (!id) {
    id = 'e' + state.nextId++;
    if (state.ids) { state.ids.set(el, id); } else { el.__mcId = id; }
    state.els[id] = el;
  }
  return id;
}
var nodes = document.querySelectorAll('input, textarea, button, a[href], [onclick]');
var out = [];
for (var i = 0; i < nodes.length; i++) {
  var el = nodes[i];
  var tag = el.tagName.toLowerCase();
  var type = tag === 'input' ? (el.getAttribute('type') || 'text').toLowerCase() : null;
  if (type === 'hidden') { continue; }
  var cs = window.getComputedStyle(el);
  if (!cs || cs.display === 'none' || cs.visibility === 'hidden') { continue; }
  var rect = el.getBoundingClientRect();
  if (!rect || rect.width <= 0 || rect.height <= 0) { continue; }
  var text;
  if (tag === 'input' || tag === 'textarea') {
    text = el.value == null ? '' : String(el.value);
  } else {
    text = (el.textContent || '').replace(/\\s+/g, ' ').trim();
  }
  out.push({
    id: handleFor(el),
    tag: tag,
    type: type,
    href: (tag === 'a' && el.href) ? String(el.href) : null,
    onclick: el.getAttribute('onclick') ? true : false,
    value: el.getAttribute('value'),
    text: text,
    x: rect.left + window.scrollX,
    y: rect.top + window.scrollY,
    w: rect.width,
    h: rect.height,
    focused: document.activeElement === el
  });
}
return out;
"""


class ViewComposer:
    """Per-session composer; holds the frame-dedup hash and view counter."""

    def __init__(
        self,
        origin_url: str,
        dedup: bool = True,
        fault_unrewritten_links: bool = False,
    ) -> None:
        origin = urlsplit(origin_url)
        self.origin_scheme = origin.scheme
        self.origin_netloc = origin.netloc
        self.dedup = dedup
        # Test hook: skip rewriting of same-origin absolute hrefs, simulating
        # the class of bug the audit's drop-out state exists to catch.
        self.fault_unrewritten_links = fault_unrewritten_links
        self._sequence = 0
        self._last_hash: str | None = None

    # -- URL rewriting -----------------------------------------------------------

    def rewrite_target(self, url: str) -> str:
        """Absolute origin URL -> proxy-local path. Total: cross-origin URLs
        ride a reversible reserved path instead of being dropped."""
        parts = urlsplit(url)
        if (parts.scheme, parts.netloc) == (self.origin_scheme, self.origin_netloc):
            path = parts.path or "/"
            return urlunsplit(("", "", path, parts.query, parts.fragment))
        encoded = base64.urlsafe_b64encode(url.encode("utf-8")).decode("ascii").rstrip("=")
        return CROSS_ORIGIN_PREFIX + encoded

    def _rewrite_element_href(self, url: str) -> str:
        if self.fault_unrewritten_links:
            parts = urlsplit(url)
            if (parts.scheme, parts.netloc) == (self.origin_scheme, self.origin_netloc):
                return url
        return self.rewrite_target(url)

    def resolve_proxy_path(self, path: str) -> str:
        """Proxy-local path -> absolute URL on the mirrored site (inverse of
        rewrite_target)."""
        if path.startswith(CROSS_ORIGIN_PREFIX):
            encoded = path[len(CROSS_ORIGIN_PREFIX):]
            padding = "=" * (-len(encoded) % 4)
            return base64.urlsafe_b64decode(encoded + padding).decode("utf-8")
        parts = urlsplit(path)
        return urlunsplit(
            (self.origin_scheme, self.origin_netloc, parts.path or "/", parts.query, parts.fragment)
        )

    # -- extraction ----------------------------------------------------------------

    def extract_elements(self, session: DriverSession) -> list[dict]:
        """Raw interactive-element records from the live DOM; empty on script
        failure (extraction must never kill the session)."""
        try:
            records = session.execute_script(EXTRACTION_SCRIPT)
        except ScriptError as exc:
            logger.error("element extraction failed: %s", exc)
            return []
        except StaleSession:
            raise
        return records or []

    def classify(self, record: dict) -> tuple[ElementKind, str | None]:
        """Maps a raw record to a descriptor kind plus rewritten href.

        Anchors carrying their own click handlers deliberately get no href:
        the client must forward those as coordinate clicks so the page script
        runs, instead of short-circuiting into a navigation.
        """
        tag = record.get("tag")
        input_type = record.get("type")
        if tag == "textarea" or (tag == "input" and input_type in TEXT_INPUT_TYPES):
            return ElementKind.TEXT_BOX, None
        if tag == "button" or (tag == "input" and input_type in BUTTON_INPUT_TYPES):
            return ElementKind.BUTTON, None
        if tag == "input":
            return ElementKind.BUTTON, None
        if tag == "a" and record.get("href") and not record.get("onclick"):
            return ElementKind.HYPERLINK, self._rewrite_element_href(record["href"])
        return ElementKind.HYPERLINK, None

    def descriptors(
        self, records: list[dict], image_width: int, image_height: int
    ) -> list[UIElementDescriptor]:
        """Classified descriptors clamped to the screenshot bounds."""
        out: list[UIElementDescriptor] = []
        for record in records:
            kind, href = self.classify(record)
            x = max(0, int(round(record["x"])))
            y = max(0, int(round(record["y"])))
            right = min(int(round(record["x"] + record["w"])), image_width)
            bottom = min(int(round(record["y"] + record["h"])), image_height)
            width = right - x
            height = bottom - y
            if width <= 0 or height <= 0:
                continue
            text = record.get("text") or ""
            if kind is ElementKind.BUTTON and not text:
                text = record.get("value") or ""
            out.append(
                UIElementDescriptor(
                    element_id=record["id"],
                    kind=kind,
                    x=x,
                    y=y,
                    width=width,
                    height=height,
                    text=text,
                    href=href,
                    focused=bool(record.get("focused")),
                    input_type=(
                        (record.get("type") or ("textarea" if record.get("tag") == "textarea" else None))
                        if kind is ElementKind.TEXT_BOX
                        else None
                    ),
                )
            )
        return out

    # -- composition -----------------------------------------------------------------

    def compose(
        self,
        snapshot: PageSnapshot,
        records: list[dict],
        history: tuple[int, int],
        favicon_path: str,
    ) -> EnrichedView:
        elements = self.descriptors(records, snapshot.image_width, snapshot.image_height)
        digest = hashlib.sha256(snapshot.screenshot).hexdigest()
        screenshot: bytes | None = snapshot.screenshot
        if self.dedup and digest == self._last_hash:
            screenshot = None
        self._last_hash = digest
        self._sequence += 1
        return EnrichedView(
            sequence=self._sequence,
            screenshot=screenshot,
            image_width=snapshot.image_width,
            image_height=snapshot.image_height,
            elements=tuple(elements),
            page_title=snapshot.title,
            favicon_path=favicon_path,
            display_path=self.rewrite_target(snapshot.current_url),
            history_back=history[0],
            history_forward=history[1],
        )
