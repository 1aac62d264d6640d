"""Functional audit of a mirrored site's top-level clickable elements.

For every button and hyperlink visible on the landing view without further
interaction, the auditor opens a fresh mirrored session, performs the click
exactly the way the viewer client would (hyperlinks as navigation events,
everything else as coordinate clicks), waits for the next settled view, and
assigns exactly one of five states:

    works          behaves as authored (navigation or DOM change)
    visual_glitch  functional, but the rendered result deviates from a
                   direct-browser reference beyond the pixel threshold
    broken         no reaction, wrong reaction, or an unreachable target
    csp_blocked    the page reported a Content-Security-Policy violation
    drop_out       the click would escape the mirror to the genuine site

The aggregate success rate counts works plus visual_glitch over all
clickables. Glitch detection needs a reference session and a configurable
threshold, so it is optional and excluded from pass/fail gates.
"""

from __future__ import annotations

import csv
import io
import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from PIL import Image, ImageChops

from .driver import DriverError, Viewport, open_session
from .gateway import GatewayConfig, GatewayHarness
from .recorder import load_events
from .wire import ElementKind, EnrichedView, UIElementDescriptor
from .wireclient import ClientError, MirrorClient

logger = logging.getLogger(__name__)


class AssessmentState(str, Enum):
    WORKS = "works"
    VISUAL_GLITCH = "visual_glitch"
    BROKEN = "broken"
    CSP_BLOCKED = "csp_blocked"
    DROP_OUT = "drop_out"


# column order follows the report legend: count, then the five states, then
# the capture-success flag
CSV_COLUMNS = [
    "site",
    "clickables",
    "works",
    "visual_glitch",
    "broken",
    "csp_blocked",
    "drop_out",
    "success_rate",
    "phish_success",
]


@dataclass(frozen=True)
class ClickableAssessment:
    element: UIElementDescriptor
    state: AssessmentState
    note: str = ""


@dataclass
class AuditReport:
    site: str
    clickable_count: int
    counts: dict[AssessmentState, int]
    success_rate: float | None
    phish_success: bool | None = None

    def validate(self) -> None:
        if sum(self.counts.values()) != self.clickable_count:
            raise ValueError("state counts do not sum to the clickable count")

    def as_row(self) -> dict:
        return {
            "site": self.site,
            "clickables": self.clickable_count,
            "works": self.counts[AssessmentState.WORKS],
            "visual_glitch": self.counts[AssessmentState.VISUAL_GLITCH],
            "broken": self.counts[AssessmentState.BROKEN],
            "csp_blocked": self.counts[AssessmentState.CSP_BLOCKED],
            "drop_out": self.counts[AssessmentState.DROP_OUT],
            "success_rate": "n/a" if self.success_rate is None else f"{self.success_rate:.4f}",
            "phish_success": "n/a" if self.phish_success is None else ("yes" if self.phish_success else "no"),
        }


@dataclass
class AuditOptions:
    viewport: Viewport = Viewport(1280, 720)
    settle_timeout_s: float = 8.0
    # fraction of differing pixels above which a working element is demoted
    # to visual_glitch; needs glitch_check (a direct reference session)
    glitch_check: bool = False
    glitch_threshold: float = 0.005
    login_probe: bool = True
    manifest: dict = field(default_factory=dict)


def enumerate_clickables(view: EnrichedView, viewport_height: int) -> list[UIElementDescriptor]:
    """Buttons and hyperlinks visible in the initial viewport, top level only
    (no scrolled-in or menu-revealed elements)."""
    out = []
    for el in view.elements:
        if el.kind not in (ElementKind.BUTTON, ElementKind.HYPERLINK):
            continue
        if el.y >= viewport_height or el.y + el.height <= 0:
            continue
        out.append(el)
    return out


def _element_signature(view: EnrichedView) -> tuple:
    """Element state that matters for did-anything-happen comparisons; the
    focused flag is excluded because merely clicking moves focus."""
    return tuple(
        (el.kind, el.x, el.y, el.width, el.height, el.text, el.href)
        for el in view.elements
    )


def pixel_diff_ratio(png_a: bytes, png_b: bytes) -> float:
    a = Image.open(io.BytesIO(png_a)).convert("RGB")
    b = Image.open(io.BytesIO(png_b)).convert("RGB")
    if a.size != b.size:
        common = (min(a.width, b.width), min(a.height, b.height))
        a = a.crop((0, 0, *common))
        b = b.crop((0, 0, *common))
    diff = ImageChops.difference(a, b).convert("L")
    histogram = diff.histogram()
    differing = sum(histogram[8:])  # tolerate tiny per-channel wobble
    total = a.width * a.height
    return differing / total if total else 0.0


class LinkAuditor:
    """Runs the audit against one target through an in-process gateway."""

    def __init__(self, config: GatewayConfig, options: AuditOptions | None = None) -> None:
        self.config = config
        self.options = options or AuditOptions()

    # -- session plumbing -----------------------------------------------------------

    def _fresh_view(self, harness: GatewayHarness) -> tuple[MirrorClient, EnrichedView]:
        client = MirrorClient(
            harness.base_url,
            viewport=(self.options.viewport.width, self.options.viewport.height),
        )
        view = client.next_view(timeout_s=self.options.settle_timeout_s * 2)
        return client, view

    def _console_of(self, harness: GatewayHarness, session_id: str) -> list[dict]:
        for state in harness.gateway.live_sessions():
            if state.session_id == session_id and state.driver is not None:
                try:
                    return state.driver.read_console()
                except DriverError:
                    return []
        return []

    @staticmethod
    def _same_element(a: UIElementDescriptor, b: UIElementDescriptor) -> bool:
        return (a.kind, a.text, a.x, a.y) == (b.kind, b.text, b.x, b.y)

    def _manifest_entry(self, element: UIElementDescriptor) -> dict | None:
        for entry in self.options.manifest.get("clickables", []):
            if entry.get("kind") == element.kind.value and entry.get("text") == element.text:
                return entry
        return None

    # -- assessment -------------------------------------------------------------------

    def assess(self, harness: GatewayHarness, element: UIElementDescriptor) -> ClickableAssessment:
        """One element, one fresh session (no state bleed between clicks)."""
        try:
            client, landing = self._fresh_view(harness)
        except ClientError as exc:
            return ClickableAssessment(element, AssessmentState.BROKEN, f"session lost: {exc}")
        try:
            return self._assess_in_session(harness, client, landing, element)
        except (ClientError, OSError) as exc:
            return ClickableAssessment(element, AssessmentState.BROKEN, f"session lost: {exc}")
        finally:
            client.close()

    def _assess_in_session(
        self,
        harness: GatewayHarness,
        client: MirrorClient,
        landing: EnrichedView,
        element: UIElementDescriptor,
    ) -> ClickableAssessment:
        live = next(
            (el for el in landing.elements if self._same_element(el, element)), None
        )
        if live is None:
            return ClickableAssessment(
                element, AssessmentState.BROKEN, "element missing from fresh landing view"
            )

        # A link the overlay would follow verbatim: an absolute href sends
        # the viewer's browser to the genuine site, control is lost.
        if live.kind is ElementKind.HYPERLINK and live.href is not None and not live.href.startswith("/"):
            return ClickableAssessment(
                element, AssessmentState.DROP_OUT, f"href escapes the mirror: {live.href}"
            )

        console_before = len(self._console_of(harness, client.session_id))
        landing_image = client.last_image
        client.click_element(live)
        try:
            after = client.next_view(timeout_s=self.options.settle_timeout_s)
        except ClientError:
            after = None

        console = self._console_of(harness, client.session_id)[console_before:]
        if any("Content-Security-Policy" in entry.get("text", "") for entry in console):
            return ClickableAssessment(
                element, AssessmentState.CSP_BLOCKED, "page reported a CSP violation"
            )

        if after is not None and not after.display_path.startswith("/"):
            return ClickableAssessment(
                element, AssessmentState.DROP_OUT, f"left the mirror at {after.display_path}"
            )

        navigated = after is not None and after.display_path != landing.display_path
        changed = after is not None and (
            after.screenshot is not None
            or _element_signature(after) != _element_signature(landing)
            or after.page_title != landing.page_title
        )
        # an image did arrive but is pixel-identical? screenshot None means
        # deduplicated, i.e. nothing visible happened
        visibly_changed = after is not None and after.screenshot is not None

        entry = self._manifest_entry(element)
        state, note = self._classify(entry, navigated, changed, visibly_changed, after)
        if state is AssessmentState.WORKS and self.options.glitch_check and after is not None:
            ratio = self._reference_diff(client, after)
            if ratio is not None and ratio > self.options.glitch_threshold:
                return ClickableAssessment(
                    element, AssessmentState.VISUAL_GLITCH, f"pixel diff {ratio:.4f}"
                )
        return ClickableAssessment(element, state, note)

    def _classify(self, entry, navigated, changed, visibly_changed, after):
        if entry is not None:
            expect_path = entry.get("expect_path")
            expect_prefix = entry.get("expect_path_prefix")
            if expect_path is not None:
                if after is not None and after.display_path == expect_path:
                    return AssessmentState.WORKS, ""
                got = after.display_path if after is not None else "no view"
                return AssessmentState.BROKEN, f"expected {expect_path}, got {got}"
            if expect_prefix is not None:
                if after is not None and after.display_path.startswith(expect_prefix):
                    return AssessmentState.WORKS, ""
                got = after.display_path if after is not None else "no view"
                return AssessmentState.BROKEN, f"expected prefix {expect_prefix}, got {got}"
            if entry.get("expect") == "dom_change":
                if not navigated and visibly_changed:
                    return AssessmentState.WORKS, ""
                return AssessmentState.BROKEN, "authored DOM change did not happen"
        # no authored expectation: any observable reaction counts as working
        if changed or navigated:
            return AssessmentState.WORKS, ""
        return AssessmentState.BROKEN, "no observable reaction to the click"

    def _reference_diff(self, client: MirrorClient, after: EnrichedView) -> float | None:
        """Pixel difference between the mirrored view and a direct browser
        rendering of the same end state."""
        if client.last_image is None:
            return None
        try:
            from .composer import ViewComposer

            composer = ViewComposer(self.config.target_url)
            reference_url = composer.resolve_proxy_path(after.display_path)
            with open_session(reference_url, self.options.viewport) as session:
                snapshot = session.capture_snapshot()
            return pixel_diff_ratio(client.last_image, snapshot.screenshot)
        except DriverError as exc:
            logger.warning("reference capture failed: %s", exc)
            return None

    # -- the full run ------------------------------------------------------------------

    def run(self) -> tuple[AuditReport, list[ClickableAssessment]]:
        harness = GatewayHarness(self.config)
        try:
            client, landing = self._fresh_view(harness)
            clickables = enumerate_clickables(landing, self.options.viewport.height)
            client.close()

            assessments = [self.assess(harness, el) for el in clickables]
            phish = self._login_probe(harness) if self.options.login_probe else None
            report = build_report(self.config.target_url, assessments, phish)
            return report, assessments
        finally:
            harness.close()

    def _login_probe(self, harness: GatewayHarness) -> bool | None:
        """Scripted credential entry for fixture sites with an authored login
        oracle; checks the recorded session log captured what was typed."""
        login = self.options.manifest.get("login")
        if not login:
            return None
        username_value = "audit-user"
        password_value = "audit-pass-123"
        try:
            client, landing = self._fresh_view(harness)
        except ClientError:
            return False
        try:
            fields = sorted(
                (e for e in landing.elements if e.kind is ElementKind.TEXT_BOX),
                key=lambda e: e.y,
            )
            if len(fields) < 2:
                return False
            client.type_text(fields[0].element_id, username_value)
            client.next_view(timeout_s=self.options.settle_timeout_s)
            client.type_text(fields[1].element_id, password_value)
            client.next_view(timeout_s=self.options.settle_timeout_s)
            submit = client.element_by_text(login["submit_text"], ElementKind.BUTTON)
            client.click_element(submit)
            after = client.next_view(timeout_s=self.options.settle_timeout_s)
            if after.display_path.split("?")[0] != login["success_path"]:
                return False
            session_id = client.session_id
        except ClientError:
            return False
        finally:
            client.close()

        deadline = time.monotonic() + 10
        while time.monotonic() < deadline:
            try:
                events = load_events(self.config.storage_dir, session_id)
            except Exception:
                events = []
            texts = [e["event"].get("text") for e in events if e["event"].get("kind") in ("textChanged", "paste")]
            if username_value in texts and password_value in texts:
                return True
            time.sleep(0.2)
        return False


def build_report(
    site: str, assessments: list[ClickableAssessment], phish: bool | None = None
) -> AuditReport:
    counts = {state: 0 for state in AssessmentState}
    for assessment in assessments:
        counts[assessment.state] += 1
    total = len(assessments)
    successes = counts[AssessmentState.WORKS] + counts[AssessmentState.VISUAL_GLITCH]
    report = AuditReport(
        site=site,
        clickable_count=total,
        counts=counts,
        success_rate=(successes / total) if total else None,
        phish_success=phish,
    )
    report.validate()
    return report


def render_text(report: AuditReport, assessments: list[ClickableAssessment]) -> str:
    lines = [
        f"site: {report.site}",
        f"clickables: {report.clickable_count}",
        (
            "works/visual_glitch/broken: "
            f"{report.counts[AssessmentState.WORKS]}"
            f"/{report.counts[AssessmentState.VISUAL_GLITCH]}"
            f"/{report.counts[AssessmentState.BROKEN]}"
        ),
        (
            "csp_blocked/drop_out: "
            f"{report.counts[AssessmentState.CSP_BLOCKED]}"
            f"/{report.counts[AssessmentState.DROP_OUT]}"
        ),
        f"success rate: {report.as_row()['success_rate']}",
        f"credential capture: {report.as_row()['phish_success']}",
        "",
    ]
    for assessment in assessments:
        el = assessment.element
        note = f"  ({assessment.note})" if assessment.note else ""
        lines.append(
            f"  [{assessment.state.value:13s}] {el.kind.value:9s} {el.text!r}{note}"
        )
    return "\n".join(lines)


def write_csv(path: str | Path, reports: list[AuditReport]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for report in reports:
            writer.writerow(report.as_row())


def audit_site(
    target_url: str,
    storage_dir: str | Path,
    options: AuditOptions | None = None,
    **config_overrides,
) -> tuple[AuditReport, list[ClickableAssessment]]:
    config = GatewayConfig(
        target_url=target_url, storage_dir=Path(storage_dir), **config_overrides
    )
    return LinkAuditor(config, options).run()
