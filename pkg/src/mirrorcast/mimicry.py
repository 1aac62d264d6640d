"""Origin trust signals replicated toward the viewer: favicon and title.

The favicon cache is the single place in the system allowed to contact the
origin directly, and it does so exactly once per unique icon URL. Everything
else about the page (title, path) is carried in view metadata.
"""

from __future__ import annotations

import base64
import hashlib
import logging
import threading

import httpx

logger = logging.getLogger(__name__)

ICON_PREFIX = "/__icon/"
BLANK_ICON_PATH = ICON_PREFIX + "blank"

# 1x1 transparent PNG, served when the origin has no usable favicon.
TRANSPARENT_PNG = base64.b64decode(
    "iVBORw0KGgoAAAANSUhEUgAAAAEAAAABCAYAAAAfFcSJAAAADUlEQVR4nGNgYGBgAAAABQAB"
    "h6FO1AAAAABJRU5ErkJggg=="
)


class FaviconCache:
    """URL-keyed icon store shared across sessions.

    Concurrent fetches of the same URL are tolerated (last write wins; the
    bytes are identical), but per-URL results are remembered so n requests
    cost one origin GET.
    """

    def __init__(self, timeout_s: float = 5.0) -> None:
        self._timeout_s = timeout_s
        self._by_url: dict[str, str] = {}
        self._by_hash: dict[str, tuple[bytes, str]] = {}
        self._lock = threading.Lock()

    def fetch(self, favicon_url: str | None) -> str:
        """Returns the proxy-local path serving this icon, fetching and
        caching it on first sight. Failures degrade to the transparent icon;
        the view must never block on mimicry."""
        if not favicon_url:
            return BLANK_ICON_PATH
        with self._lock:
            cached = self._by_url.get(favicon_url)
        if cached is not None:
            return cached

        try:
            response = httpx.get(
                favicon_url, timeout=self._timeout_s, follow_redirects=True
            )
            response.raise_for_status()
            body = response.content
            content_type = response.headers.get("content-type", "image/x-icon")
        except (httpx.HTTPError, OSError) as exc:
            logger.warning("favicon fetch failed for %s: %s", favicon_url, exc)
            with self._lock:
                self._by_url[favicon_url] = BLANK_ICON_PATH
            return BLANK_ICON_PATH

        digest = hashlib.sha256(body).hexdigest()[:16]
        path = ICON_PREFIX + digest
        with self._lock:
            self._by_hash[digest] = (body, content_type)
            self._by_url[favicon_url] = path
        return path

    def lookup(self, icon_name: str) -> tuple[bytes, str] | None:
        """Resolves the hash segment of a ``/__icon/...`` path to bytes."""
        if icon_name == "blank":
            return TRANSPARENT_PNG, "image/png"
        with self._lock:
            return self._by_hash.get(icon_name)


def title_of(view) -> str:
    """The exact origin title, unmodified; the client mirrors it verbatim."""
    return view.page_title
