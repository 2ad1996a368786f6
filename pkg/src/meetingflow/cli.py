"""Command line front door: serve the API, run scripts, manage fixtures."""

from __future__ import annotations

import functools
import sys
from pathlib import Path

import click

from .config import AppConfig, load_app_config
from .errors import MeetingFlowError, ProviderFailure, ValidationFailure
from .events import EventLogStore, read_log
from .gateway import GenAiGateway
from .prompts import PromptLibrary
from .scenario import ScenarioScript, run_scenario
from .session import SessionEngine

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_PROVIDER = 2
EXIT_INTERNAL = 3


def guarded(fn):
    """Map failures to stable exit codes instead of tracebacks."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ProviderFailure as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_PROVIDER)
        except (ValidationFailure, MeetingFlowError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_INVALID)
        except Exception as exc:  # pragma: no cover - last resort
            click.echo(f"internal error: {exc}", err=True)
            sys.exit(EXIT_INTERNAL)

    return wrapper


def build_engine(cfg: AppConfig) -> SessionEngine:
    return SessionEngine(
        gateway=GenAiGateway(cfg.provider),
        library=PromptLibrary(cfg.prompts_dir),
        store=EventLogStore(cfg.server.data_dir),
        default_config=cfg.session,
    )


config_option = click.option(
    "--config", "config_path", type=click.Path(), default=None,
    help="JSON config file; flags override its values.",
)
fixtures_option = click.option(
    "--fixtures-dir", default=None, help="Directory of recorded model responses."
)
prompts_option = click.option(
    "--prompts-dir", default=None, help="Directory of prompt templates."
)
data_option = click.option(
    "--data-dir", default=None, help="Directory for per-session event logs."
)


@click.group()
def main():
    """Goal-driven meeting orchestration."""


@main.command()
@config_option
@click.option("--host", default=None, help="Bind address.")
@click.option("--port", type=int, default=None, help="Bind port.")
@click.option(
    "--provider-mode", default=None,
    type=click.Choice(["live", "replay", "record"]),
    help="Where structured generations come from.",
)
@fixtures_option
@prompts_option
@data_option
@click.option("--static-dir", default=None, help="Serve this directory at / (web client build).")
@guarded
def serve(config_path, host, port, provider_mode, fixtures_dir, prompts_dir, data_dir, static_dir):
    """Run the HTTP and WebSocket server."""
    import uvicorn

    from .server import build_app

    cfg = load_app_config(
        path=config_path, provider_mode=provider_mode, fixtures_dir=fixtures_dir,
        prompts_dir=prompts_dir, data_dir=data_dir, host=host, port=port,
        static_dir=static_dir,
    )
    cfg.require_api_key()
    app = build_app(build_engine(cfg), static_dir=cfg.server.static_dir)
    click.echo(f"serving on {cfg.server.host}:{cfg.server.port} (provider: {cfg.provider.mode})")
    uvicorn.run(app, host=cfg.server.host, port=cfg.server.port, log_level="warning")


@main.group()
def scenario():
    """Scripted meetings on a virtual clock."""


def _run_script(script_path, cfg: AppConfig, timeline: str | None) -> None:
    script = ScenarioScript.load(script_path)
    engine = build_engine(cfg)
    if timeline is None:
        timeline = str(Path(cfg.server.data_dir) / f"{script.session_id}.timeline")
    outcome = run_scenario(script, engine, timeline_path=timeline)
    click.echo(f"session:   {outcome.session_id}")
    click.echo(f"events:    {outcome.event_count}")
    click.echo(f"committed: {outcome.committed_transitions}")
    click.echo(f"aborted:   {outcome.aborted_transitions}")
    click.echo(f"lifecycle: {outcome.final_lifecycle}")
    click.echo(f"log:       {outcome.log_path}")
    click.echo(f"timeline:  {outcome.timeline_path}")


@scenario.command("run")
@click.argument("script_path", type=click.Path())
@config_option
@fixtures_option
@prompts_option
@data_option
@click.option("--timeline", default=None, help="Where to write the human-readable timeline.")
@guarded
def scenario_run(script_path, config_path, fixtures_dir, prompts_dir, data_dir, timeline):
    """Replay SCRIPT_PATH against recorded fixtures."""
    cfg = load_app_config(
        path=config_path, fixtures_dir=fixtures_dir,
        prompts_dir=prompts_dir, data_dir=data_dir,
    )
    _run_script(script_path, cfg, timeline)


@main.group()
def fixtures():
    """Recorded model responses for deterministic replay."""


@fixtures.command("record")
@click.argument("script_path", type=click.Path())
@config_option
@fixtures_option
@prompts_option
@data_option
@click.option("--timeline", default=None, help="Where to write the human-readable timeline.")
@guarded
def fixtures_record(script_path, config_path, fixtures_dir, prompts_dir, data_dir, timeline):
    """Run SCRIPT_PATH against the live provider, saving every response."""
    cfg = load_app_config(
        path=config_path, provider_mode="record", fixtures_dir=fixtures_dir,
        prompts_dir=prompts_dir, data_dir=data_dir,
    )
    cfg.require_api_key()
    _run_script(script_path, cfg, timeline)


@main.group()
def log():
    """Inspect per-session event logs."""


@log.command("replay")
@click.argument("log_path", type=click.Path())
@guarded
def log_replay(log_path):
    """Rebuild session state from LOG_PATH and summarize it."""
    from .errors import ProtocolError
    from .session import replay

    if not Path(log_path).is_file():
        raise ProtocolError(f"log file not found: {log_path}")
    records = read_log(log_path)
    state = replay(records)
    kinds = [r.kind for r in records]
    click.echo(f"session:   {state.session_id}")
    click.echo(f"events:    {len(records)}")
    click.echo(f"lifecycle: {state.lifecycle}")
    click.echo(f"members:   {len(state.members)}")
    if state.plan is not None:
        click.echo(f"plan:      rev {state.plan.revision}, {len(state.plan.phases)} phases")
    click.echo(f"committed: {kinds.count('transition_committed')}")
    click.echo(f"aborted:   {kinds.count('transition_aborted')}")
    if state.tracker is not None:
        click.echo(f"phase:     {state.tracker.current_phase_index}")


if __name__ == "__main__":
    main()
