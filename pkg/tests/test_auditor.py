"""Link-auditor tests: five-state classification against authored fixtures."""

import pytest

from mirrorcast.auditor import (
    AssessmentState,
    AuditOptions,
    AuditReport,
    LinkAuditor,
    build_report,
    ClickableAssessment,
    enumerate_clickables,
    pixel_diff_ratio,
    render_text,
    write_csv,
)
from mirrorcast.gateway import GatewayConfig
from mirrorcast.wire import ElementKind, EnrichedView, UIElementDescriptor


def element(kind=ElementKind.HYPERLINK, text="x", y=10):
    return UIElementDescriptor("e1", kind, 10, y, 40, 20, text=text)


def make_view(elements):
    return EnrichedView(
        sequence=1,
        screenshot=b"\x89PNG\r\n\x1a\nxx",
        image_width=1280,
        image_height=3000,
        elements=tuple(elements),
        page_title="t",
        favicon_path="/__icon/blank",
        display_path="/",
        history_back=0,
        history_forward=0,
    )


def run_audit(tmp_path, server, **option_overrides):
    options = AuditOptions(manifest=server.manifest, **option_overrides)
    config = GatewayConfig(
        target_url=server.url,
        storage_dir=tmp_path / "sessions",
        quiescence_ms=120,
    )
    return LinkAuditor(config, options).run()


# --- enumeration ------------------------------------------------------------------


def test_enumerate_filters_kinds_and_viewport():
    elements = [
        element(ElementKind.HYPERLINK, "in", y=100),
        element(ElementKind.BUTTON, "btn", y=200),
        element(ElementKind.TEXT_BOX, "field", y=150),
        element(ElementKind.HYPERLINK, "below fold", y=900),
    ]
    visible = enumerate_clickables(make_view(elements), viewport_height=720)
    assert [e.text for e in visible] == ["in", "btn"]


def test_enumerate_blank_view_is_empty():
    assert enumerate_clickables(make_view([]), 720) == []


# --- report math -------------------------------------------------------------------


def test_all_works_rate_is_one():
    assessments = [
        ClickableAssessment(element(), AssessmentState.WORKS) for _ in range(5)
    ]
    report = build_report("s", assessments)
    assert report.success_rate == 1.0
    report.validate()


def test_mixed_eight_works_two_broken_rate():
    assessments = [
        ClickableAssessment(element(), AssessmentState.WORKS) for _ in range(8)
    ] + [ClickableAssessment(element(), AssessmentState.BROKEN) for _ in range(2)]
    report = build_report("s", assessments)
    assert report.success_rate == pytest.approx(0.8)


def test_glitches_count_toward_success_rate():
    # glitchy-but-usable elements count as successes in the aggregate rate
    assessments = (
        [ClickableAssessment(element(), AssessmentState.WORKS)] * 66
        + [ClickableAssessment(element(), AssessmentState.VISUAL_GLITCH)] * 32
        + [ClickableAssessment(element(), AssessmentState.BROKEN)] * 2
    )
    report = build_report("s", assessments)
    assert report.success_rate == pytest.approx(0.98)


def test_empty_site_rate_is_undefined():
    report = build_report("s", [])
    assert report.success_rate is None
    assert report.as_row()["success_rate"] == "n/a"


def test_counts_must_sum():
    report = AuditReport(
        site="s",
        clickable_count=3,
        counts={state: 0 for state in AssessmentState},
        success_rate=None,
    )
    with pytest.raises(ValueError):
        report.validate()


def test_csv_column_order(tmp_path):
    report = build_report(
        "site-a", [ClickableAssessment(element(), AssessmentState.WORKS)], phish=True
    )
    out = tmp_path / "audit.csv"
    write_csv(out, [report])
    header = out.read_text().splitlines()[0]
    assert header == "site,clickables,works,visual_glitch,broken,csp_blocked,drop_out,success_rate,phish_success"


def test_pixel_diff_ratio_detects_differences(tmp_path):
    import io
    from PIL import Image

    def png_of(color):
        img = Image.new("RGB", (100, 100), color)
        buf = io.BytesIO()
        img.save(buf, format="PNG")
        return buf.getvalue()

    same = pixel_diff_ratio(png_of("white"), png_of("white"))
    different = pixel_diff_ratio(png_of("white"), png_of("black"))
    assert same == 0.0
    assert different == 1.0


# --- live audits over fixtures ---------------------------------------------------------


def test_static_fixture_all_clickables_work(tmp_path, static_site):
    report, assessments = run_audit(tmp_path, static_site)
    manifest = static_site.manifest
    assert report.clickable_count == len(manifest["clickables"])
    assert report.counts[AssessmentState.WORKS] == report.clickable_count
    assert report.counts[AssessmentState.DROP_OUT] == 0
    assert report.counts[AssessmentState.CSP_BLOCKED] == 0
    assert report.success_rate == 1.0


def test_mixed_fixture_classifies_broken(tmp_path, site_servers):
    mixed = site_servers["extra_mixed"]
    report, assessments = run_audit(tmp_path, mixed)
    assert report.clickable_count == 10
    assert report.counts[AssessmentState.WORKS] == 8
    assert report.counts[AssessmentState.BROKEN] == 2
    assert report.success_rate == pytest.approx(0.8)
    broken_texts = {
        a.element.text for a in assessments if a.state is AssessmentState.BROKEN
    }
    assert broken_texts == {"Dead endpoint", "Does nothing"}


def test_csp_fixture_classifies_blocked_submit(tmp_path, site_servers):
    csp = site_servers["extra_csp"]
    report, assessments = run_audit(tmp_path, csp, login_probe=False)
    by_text = {a.element.text: a.state for a in assessments}
    assert by_text["Send"] is AssessmentState.CSP_BLOCKED
    assert by_text["Elsewhere"] is AssessmentState.WORKS


def test_fault_injected_unrewritten_links_classify_as_dropout(tmp_path, static_site):
    options = AuditOptions(manifest=static_site.manifest, login_probe=False)
    config = GatewayConfig(
        target_url=static_site.url,
        storage_dir=tmp_path / "sessions",
        quiescence_ms=120,
        fault_unrewritten_links=True,
    )
    report, assessments = LinkAuditor(config, options).run()
    links = [a for a in assessments if a.element.kind is ElementKind.HYPERLINK]
    assert links and all(a.state is AssessmentState.DROP_OUT for a in links)
    assert report.counts[AssessmentState.DROP_OUT] == len(links)


def test_login_probe_captures_credentials(tmp_path, login_site):
    report, assessments = run_audit(tmp_path, login_site)
    assert report.phish_success is True
    assert report.counts[AssessmentState.DROP_OUT] == 0


def test_audit_is_deterministic_on_fixtures(tmp_path, multipage_site):
    first_report, first = run_audit(tmp_path, multipage_site, login_probe=False)
    second_report, second = run_audit(tmp_path, multipage_site, login_probe=False)
    assert first_report.counts == second_report.counts
    assert [(a.element.text, a.state) for a in first] == [
        (a.element.text, a.state) for a in second
    ]
    assert render_text(first_report, first) == render_text(second_report, second)


def test_glitch_check_passes_clean_on_fixture(tmp_path, multipage_site):
    report, assessments = run_audit(
        tmp_path, multipage_site, login_probe=False, glitch_check=True
    )
    assert report.counts[AssessmentState.VISUAL_GLITCH] == 0
    assert report.counts[AssessmentState.WORKS] == report.clickable_count


def test_working_element_demotes_to_glitch_above_threshold(tmp_path, multipage_site, monkeypatch):
    import mirrorcast.auditor as auditor_module

    monkeypatch.setattr(auditor_module, "pixel_diff_ratio", lambda a, b: 0.25)
    report, assessments = run_audit(
        tmp_path, multipage_site, login_probe=False, glitch_check=True
    )
    assert report.counts[AssessmentState.VISUAL_GLITCH] == report.clickable_count
    assert report.success_rate == 1.0  # glitches still count as successes
