"""Shared fixtures: fixture-site servers and browser session helpers."""

import shutil
import subprocess
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fixture_server import FIXTURES_DIR, FixtureServer  # noqa: E402

from mirrorcast.driver import Viewport, open_session  # noqa: E402

REPO_ROOT = Path(__file__).parent.parent
MICROBROWSER_DIR = REPO_ROOT / "microbrowser"

VIEWPORT = Viewport(1280, 720)


def _ensure_microbrowser_ready() -> None:
    if shutil.which("node") is None:
        pytest.exit("node is required: the test browser is the bundled page engine", 1)
    if not (MICROBROWSER_DIR / "node_modules").is_dir():
        subprocess.run(
            ["npm", "install", "--no-audit", "--no-fund"],
            cwd=MICROBROWSER_DIR,
            check=True,
            capture_output=True,
        )


@pytest.fixture(scope="session", autouse=True)
def microbrowser_ready():
    _ensure_microbrowser_ready()


@pytest.fixture(scope="session")
def partner_site():
    """Second origin used for cross-origin links in the corpus."""
    server = FixtureServer("site_static")
    yield server
    server.close()


@pytest.fixture(scope="session")
def site_servers(partner_site):
    """One server per fixture site, keyed by site name."""
    servers = {}
    xorigin = partner_site.url.rstrip("/")
    for site_dir in sorted(FIXTURES_DIR.iterdir()):
        if site_dir.is_dir():
            servers[site_dir.name] = FixtureServer(site_dir.name, xorigin=xorigin)
    yield servers
    for server in servers.values():
        server.close()


@pytest.fixture()
def static_site(site_servers):
    return site_servers["site_static"]


@pytest.fixture()
def login_site(site_servers):
    return site_servers["site_login"]


@pytest.fixture()
def multipage_site(site_servers):
    return site_servers["site_multipage"]


@pytest.fixture()
def slider_site(site_servers):
    return site_servers["site_slider"]


@pytest.fixture()
def tall_site(site_servers):
    return site_servers["site_tall"]


@pytest.fixture()
def browser_at():
    """Factory opening driver sessions that are reaped at test end."""
    sessions = []

    def _open(url: str, viewport: Viewport = VIEWPORT, ad_block: bool = False):
        session = open_session(url, viewport, ad_block=ad_block)
        sessions.append(session)
        return session

    yield _open
    for session in sessions:
        session.close()
