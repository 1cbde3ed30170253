"""Command-line entry points: serve the API, export metrics, draft a graph."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .analytics import export_metrics
from .concepts import draft_graph
from .content import ContentStore
from .gateway import GatewayConfig, HttpGateway, MockGateway, load_script
from .prompts import DEFAULT_EXCERPT_BUDGET
from .service import ServiceConfig, create_app
from .sessions import SessionManager


@click.group()
def main():
    """Grounded tutoring chat with cause-tagged follow-up questions."""


@main.command()
@click.option("--port", default=8000, show_default=True, help="TCP port to listen on.")
@click.option("--host", default="127.0.0.1", show_default=True, help="Bind address; loopback by default.")
@click.option("--data-dir", default="./data", show_default=True, type=click.Path(path_type=Path))
@click.option("--mock-script", default=None, type=click.Path(exists=True, path_type=Path), help="Run against the scripted gateway mock instead of a live provider.")
@click.option("--excerpt-budget", default=DEFAULT_EXCERPT_BUDGET, show_default=True, help="Grounding excerpt size cap in characters.")
@click.option("--ui-dir", default=None, type=click.Path(path_type=Path), help="Directory of built UI assets to mount at /ui.")
def serve(port, host, data_dir, mock_script, excerpt_budget, ui_dir):
    """Start the HTTP service."""
    import uvicorn

    config = ServiceConfig(
        data_dir=data_dir,
        host=host,
        port=port,
        excerpt_budget=excerpt_budget,
        mock_script=mock_script,
        ui_dir=ui_dir,
    )
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port)


@main.command("export-metrics")
@click.option("--data-dir", default="./data", show_default=True, type=click.Path(exists=True, path_type=Path))
def export_metrics_cmd(data_dir):
    """Print the per-session metrics report as CSV."""
    store = ContentStore(data_dir / "documents")
    manager = SessionManager(store, MockGateway([]), data_dir=data_dir)
    sessions = [manager.get_session(sid) for sid in manager.session_ids()]
    click.echo(export_metrics(sessions), nl=False)


@main.command("draft-graph")
@click.argument("document_id")
@click.option("--data-dir", default="./data", show_default=True, type=click.Path(exists=True, path_type=Path))
@click.option("--keywords", "k", default=15, show_default=True, help="How many extracted keywords to send for glossary proposal.")
@click.option("--mock-script", default=None, type=click.Path(exists=True, path_type=Path))
def draft_graph_cmd(document_id, data_dir, k, mock_script):
    """Bootstrap a draft curation file for DOCUMENT_ID (curator reviews it)."""
    store = ContentStore(data_dir / "documents")
    doc = store.get(document_id)
    if mock_script is not None:
        gateway = MockGateway(load_script(mock_script))
    else:
        gateway = HttpGateway(GatewayConfig.from_env())
    click.echo(json.dumps(draft_graph(doc, gateway, k=k), ensure_ascii=False, indent=2))


@main.command("export-openapi")
def export_openapi():
    """Print the machine-readable API description."""
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        config = ServiceConfig(data_dir=Path(tmp))
        app = create_app(config, gateway=MockGateway([]))
        json.dump(app.openapi(), sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")


if __name__ == "__main__":
    main()
