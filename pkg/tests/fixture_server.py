"""Deterministic local web server for the fixture corpus.

Serves one fixture site directory, counts hits per path (so tests can assert
how often the origin was contacted), substitutes {{XORIGIN}} in HTML with a
second fixture origin, and synthesizes the generic target pages the corpus
links to (/p/<name>.html, /t/<name>.html, /m/<name>.html).

Also runnable standalone for the browser-side end-to-end test:
    python tests/fixture_server.py --site site_login --port 8911
"""

from __future__ import annotations

import argparse
import json
import re
import threading
from collections import Counter
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

FIXTURES_DIR = Path(__file__).parent / "fixtures"

SYNTH_PAGE = """<!doctype html>
<html>
<head><meta charset="utf-8"><title>{title}</title></head>
<body style="margin:0; height:720px;">
  <h1 style="position:absolute; left:40px; top:20px;">{title}</h1>
  <a href="/index.html" style="position:absolute; left:40px; top:120px;">Home</a>
</body>
</html>
"""

NOT_FOUND_PAGE = """<!doctype html>
<html>
<head><meta charset="utf-8"><title>404 Fixture</title></head>
<body style="margin:0; height:720px;">
  <h1 style="position:absolute; left:40px; top:20px;">Not found</h1>
</body>
</html>
"""

CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript",
    ".css": "text/css",
    ".ico": "image/png",
    ".png": "image/png",
    ".json": "application/json",
}


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def log_message(self, *args):  # keep test output quiet
        pass

    def _send(self, status: int, body: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_POST(self):
        self.do_GET()

    def do_GET(self):
        server: FixtureServer = self.server.fixture_server  # type: ignore[attr-defined]
        path = self.path.split("?", 1)[0]
        server.counts[path] += 1

        if path == "/__counts":
            self._send(200, json.dumps(dict(server.counts)).encode(), "application/json")
            return

        if path in ("", "/"):
            path = "/index.html"

        synth = re.fullmatch(r"/(?:p|t|m)/([a-z0-9]+)\.html", path)
        if synth:
            title = f"Page {synth.group(1)}"
            self._send(200, SYNTH_PAGE.format(title=title).encode(), CONTENT_TYPES[".html"])
            return

        if path == "/ads/banner.js":
            candidate = server.site_dir / "ads_banner.js"
            if candidate.exists():
                self._send(200, candidate.read_bytes(), CONTENT_TYPES[".js"])
                return

        candidate = (server.site_dir / path.lstrip("/")).resolve()
        if not str(candidate).startswith(str(server.site_dir.resolve())) or not candidate.is_file():
            self._send(404, NOT_FOUND_PAGE.encode(), CONTENT_TYPES[".html"])
            return

        body = candidate.read_bytes()
        if candidate.suffix == ".html" and b"{{XORIGIN}}" in body:
            body = body.replace(b"{{XORIGIN}}", server.xorigin.encode())
        self._send(200, body, CONTENT_TYPES.get(candidate.suffix, "application/octet-stream"))


class FixtureServer:
    """One fixture site on an ephemeral port."""

    def __init__(self, site: str | Path, port: int = 0, xorigin: str = "") -> None:
        self.site_dir = Path(site) if Path(site).is_absolute() else FIXTURES_DIR / site
        if not self.site_dir.is_dir():
            raise FileNotFoundError(f"no fixture site at {self.site_dir}")
        self.counts: Counter[str] = Counter()
        self.xorigin = xorigin
        self.httpd = ThreadingHTTPServer(("127.0.0.1", port), _Handler)
        self.httpd.fixture_server = self  # type: ignore[attr-defined]
        self.port = self.httpd.server_address[1]
        self.url = f"http://127.0.0.1:{self.port}/"
        self._thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self._thread.start()

    @property
    def manifest(self) -> dict:
        path = self.site_dir / "manifest.json"
        return json.loads(path.read_text()) if path.exists() else {}

    def hit_count(self, path: str) -> int:
        return self.counts[path]

    def close(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()
        self._thread.join(timeout=5)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--site", required=True, help="fixture site directory name")
    parser.add_argument("--port", type=int, default=0)
    parser.add_argument("--xorigin", default="")
    args = parser.parse_args()
    server = FixtureServer(args.site, args.port, args.xorigin)
    print(json.dumps({"url": server.url, "port": server.port}), flush=True)
    try:
        server._thread.join()
    except KeyboardInterrupt:
        server.close()


if __name__ == "__main__":
    main()
