"""Command line entry points.

All commands operate on a store named by a config file, so the same config
drives the server and offline administration.
"""

from __future__ import annotations

import sys
from datetime import timedelta
from pathlib import Path

import click

from .auth import GlobalRole, SessionManager, User, hash_password, valid_username
from .config import Config, load_config
from .core import CURRENT_SCHEMA
from .errors import GalleryError
from .migration import migrate_store
from .seed import DEFAULT_SEED_PASSWORD, seed_store
from .storage import Store
from .workflow import GalleryService


def _open_store(config: Config, create: bool = False) -> Store:
    if create:
        return Store.open_or_initialize(config.data_dir)
    return Store(config.data_dir)


_config_option = click.option(
    "--config",
    "config_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Path to the key=value config file.",
)


@click.group()
def main() -> None:
    """Versioned gallery for digital research data."""


@main.command()
@_config_option
@click.option(
    "--ui",
    "ui_dir",
    type=click.Path(exists=True, file_okay=False, path_type=Path),
    default=None,
    help="Directory of built web UI assets to serve under /ui/.",
)
def serve(config_path: Path, ui_dir: Path | None) -> None:
    """Run the HTTP server."""
    import uvicorn

    from .api import create_app

    config = load_config(config_path)
    store = _open_store(config, create=True)
    sessions = SessionManager(ttl=timedelta(hours=config.session_ttl_hours))
    service = GalleryService(store, sessions)
    app = create_app(service, config, ui_dir=ui_dir)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")


@main.command()
@click.argument("name")
@click.option(
    "--role",
    type=click.Choice([r.value for r in GlobalRole]),
    default=GlobalRole.AUTHOR.value,
    show_default=True,
    help="Global role for the new account.",
)
@click.option("--display-name", default=None, help="Human-readable name (defaults to the username).")
@click.option("--email", required=True, help="Contact address.")
@_config_option
def adduser(name: str, role: str, display_name: str | None, email: str, config_path: Path) -> None:
    """Create a user account, prompting for its password."""
    if not valid_username(name):
        raise click.ClickException("invalid username %r: use 3-32 lowercase letters, digits, or hyphens" % name)
    config = load_config(config_path)
    store = _open_store(config, create=True)
    password = click.prompt("Password", hide_input=True, confirmation_prompt=True)
    try:
        store.add_user(User(name, display_name or name, email, GlobalRole(role), hash_password(password)))
    except GalleryError as exc:
        raise click.ClickException("%s: %s" % (exc.code, exc.message)) from exc
    click.echo("created user %s (%s)" % (name, role))


@main.command()
@click.option("--target", type=int, default=CURRENT_SCHEMA, show_default=True, help="Schema version to reach.")
@click.option("--dry-run", is_flag=True, help="Validate and transform without writing anything.")
@_config_option
def migrate(target: int, dry_run: bool, config_path: Path) -> None:
    """Migrate the store to a newer document schema."""
    config = load_config(config_path)
    store = _open_store(config)
    try:
        report = migrate_store(store, target, dry_run=dry_run)
    except GalleryError as exc:
        _print_migration_failure(exc)
        sys.exit(1)
    mode = "dry run" if report.dry_run else "migration"
    if report.from_schema == report.to_schema:
        click.echo("store already at schema %d; nothing to do" % report.to_schema)
        return
    click.echo(
        "%s %d -> %d: %d documents ok"
        % (mode, report.from_schema, report.to_schema, len(report.outcomes))
    )
    if report.backup is not None:
        click.echo("pre-migration state retained at %s" % report.backup)


def _print_migration_failure(exc: GalleryError) -> None:
    click.echo("migration failed: %s" % exc.message, err=True)
    report = exc.context.get("report")
    if report is None:
        return
    for outcome in report.failures:
        click.echo("  %s v%d:" % (outcome.key, outcome.version), err=True)
        if outcome.error is not None:
            click.echo("    %s" % outcome.error, err=True)
        if outcome.report is not None:
            for violation in outcome.report.violations:
                click.echo("    %s %s: %s" % (violation.code, violation.path, violation.message), err=True)


@main.command()
@_config_option
def seed(config_path: Path) -> None:
    """Load the demo fixture content into the store."""
    config = load_config(config_path)
    store = _open_store(config, create=True)
    try:
        keys = seed_store(store)
    except GalleryError as exc:
        raise click.ClickException("%s: %s" % (exc.code, exc.message)) from exc
    for key in keys:
        click.echo("seeded %s" % key)
    click.echo("demo accounts use the password %r" % DEFAULT_SEED_PASSWORD)


if __name__ == "__main__":
    main()
