"""Command line interface.

    mirrorcast --target https://site.example [--port 8080] [...]   serve
    mirrorcast audit --target https://site.example [--csv out.csv] audit

Every option can also come from the environment with the MIRRORCAST_ prefix
(e.g. MIRRORCAST_TARGET, MIRRORCAST_PORT).
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

import click

from .auditor import AuditOptions, LinkAuditor, render_text, write_csv
from .driver import Viewport
from .gateway import GatewayConfig, serve as serve_gateway


def parse_viewport(value: str) -> Viewport:
    try:
        width, height = value.lower().split("x")
        return Viewport(int(width), int(height))
    except ValueError as exc:
        raise click.BadParameter(f"viewport must look like 1280x800, got {value!r}") from exc


@click.group(invoke_without_command=True)
@click.option("--target", help="absolute URL of the site to mirror (required to serve)")
@click.option("--port", default=8080, show_default=True, help="HTTP port toward viewers")
@click.option("--viewport", default="1280x800", show_default=True, help="default render size")
@click.option("--quiescence-ms", default=200, show_default=True,
              help="idle time after the last replayed event before a capture")
@click.option("--ad-block", is_flag=True, help="install the content blocker in the headless browser")
@click.option("--record-screenshots", is_flag=True, help="persist every captured frame")
@click.option("--storage", type=click.Path(path_type=Path), default=Path("./sessions"),
              show_default=True, help="directory for session records")
@click.option("--session-timeout-s", default=300, show_default=True)
@click.option("--tls-cert", type=click.Path(path_type=Path), default=None,
              help="optional TLS certificate toward viewers (untested)")
@click.option("--tls-key", type=click.Path(path_type=Path), default=None)
@click.option("--verbose", is_flag=True)
@click.pass_context
def cli(ctx, target, port, viewport, quiescence_ms, ad_block, record_screenshots,
        storage, session_timeout_s, tls_cert, tls_key, verbose):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="[%(asctime)s] %(name)s %(levelname)s: %(message)s",
    )
    if not verbose:
        logging.getLogger("httpx").setLevel(logging.WARNING)
    if ctx.invoked_subcommand is not None:
        return
    if not target:
        raise click.UsageError("--target is required (the URL to mirror)")
    config = GatewayConfig(
        target_url=target,
        http_port=port,
        viewport_default=parse_viewport(viewport),
        quiescence_ms=quiescence_ms,
        ad_block=ad_block,
        record_screenshots=record_screenshots,
        session_timeout_s=session_timeout_s,
        storage_dir=storage,
        tls_certfile=tls_cert,
        tls_keyfile=tls_key,
    )
    try:
        config.validate()
    except ValueError as exc:
        raise click.UsageError(str(exc))
    click.echo(f"mirroring {target} on port {port}")
    serve_gateway(config)


@cli.command()
@click.option("--target", required=True, help="absolute URL of the site to audit")
@click.option("--csv", "csv_path", type=click.Path(path_type=Path), default=None,
              help="write the aggregate report row to this CSV file")
@click.option("--manifest", type=click.Path(path_type=Path, exists=True), default=None,
              help="authored manifest with per-clickable expectations")
@click.option("--storage", type=click.Path(path_type=Path), default=Path("./audit-sessions"),
              show_default=True)
@click.option("--viewport", default="1280x720", show_default=True)
@click.option("--glitch-check", is_flag=True,
              help="compare against direct renders to flag visual glitches")
@click.option("--glitch-threshold", default=0.005, show_default=True)
def audit(target, csv_path, manifest, storage, viewport, glitch_check, glitch_threshold):
    """Classify every top-level clickable of the mirrored site."""
    manifest_data = json.loads(Path(manifest).read_text()) if manifest else {}
    options = AuditOptions(
        viewport=parse_viewport(viewport),
        glitch_check=glitch_check,
        glitch_threshold=glitch_threshold,
        manifest=manifest_data,
        login_probe=bool(manifest_data.get("login")),
    )
    config = GatewayConfig(target_url=target, storage_dir=storage)
    try:
        config.validate()
    except ValueError as exc:
        raise click.UsageError(str(exc))
    report, assessments = LinkAuditor(config, options).run()
    click.echo(render_text(report, assessments))
    if csv_path:
        write_csv(csv_path, [report])
        click.echo(f"csv written to {csv_path}")


def main() -> None:
    cli(auto_envvar_prefix="MIRRORCAST")


if __name__ == "__main__":
    main()
