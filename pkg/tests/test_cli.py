"""CLI surface tests."""

import json

from click.testing import CliRunner

from mirrorcast import cli as cli_module
from mirrorcast.cli import cli
from mirrorcast.driver import Viewport


def test_help_lists_expected_options():
    runner = CliRunner()
    result = runner.invoke(cli, ["--help"])
    assert result.exit_code == 0
    for option in ["--target", "--port", "--quiescence-ms", "--ad-block",
                   "--record-screenshots", "--storage", "--session-timeout-s"]:
        assert option in result.output
    result = runner.invoke(cli, ["audit", "--help"])
    assert result.exit_code == 0
    assert "--csv" in result.output


def test_serve_requires_target():
    runner = CliRunner()
    result = runner.invoke(cli, [])
    assert result.exit_code != 0
    assert "--target is required" in result.output


def test_serve_rejects_bad_target(monkeypatch):
    runner = CliRunner()
    result = runner.invoke(cli, ["--target", "not-a-url"])
    assert result.exit_code != 0
    assert "absolute http(s) URL" in result.output


def test_serve_builds_config_and_hands_off(monkeypatch):
    seen = {}
    monkeypatch.setattr(cli_module, "serve_gateway", lambda config: seen.update(config=config))
    runner = CliRunner()
    result = runner.invoke(cli, [
        "--target", "http://example.org/",
        "--port", "9999",
        "--viewport", "1024x768",
        "--quiescence-ms", "150",
        "--ad-block",
        "--record-screenshots",
        "--session-timeout-s", "60",
    ])
    assert result.exit_code == 0, result.output
    config = seen["config"]
    assert config.target_url == "http://example.org/"
    assert config.http_port == 9999
    assert config.viewport_default == Viewport(1024, 768)
    assert config.quiescence_ms == 150
    assert config.ad_block and config.record_screenshots
    assert config.session_timeout_s == 60


def test_env_var_overrides(monkeypatch):
    seen = {}
    monkeypatch.setattr(cli_module, "serve_gateway", lambda config: seen.update(config=config))
    runner = CliRunner()
    result = runner.invoke(
        cli, [], env={"MIRRORCAST_TARGET": "http://fromenv.example/", "MIRRORCAST_PORT": "8123"},
        auto_envvar_prefix="MIRRORCAST",
    )
    assert result.exit_code == 0, result.output
    assert seen["config"].target_url == "http://fromenv.example/"
    assert seen["config"].http_port == 8123


def test_audit_command_runs_and_writes_csv(tmp_path, multipage_site):
    manifest_path = tmp_path / "manifest.json"
    manifest_path.write_text(json.dumps(multipage_site.manifest))
    runner = CliRunner()
    result = runner.invoke(cli, [
        "audit",
        "--target", multipage_site.url,
        "--csv", str(tmp_path / "report.csv"),
        "--manifest", str(manifest_path),
        "--storage", str(tmp_path / "sessions"),
    ])
    assert result.exit_code == 0, result.output
    assert "success rate: 1.0000" in result.output
    header, row = (tmp_path / "report.csv").read_text().splitlines()
    assert header.startswith("site,clickables,works")
    assert ",6,6,0,0,0,0," in row
