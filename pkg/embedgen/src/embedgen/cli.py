"""Command-line entry points: embedgen catalog|queries.

Exit codes follow the engine CLI's convention: 0 on success, 1 for
domain failures (schema, references, empty text, model errors), 2 for
usage problems (unreadable files, invalid JSON, bad flags).
"""

from __future__ import annotations

import sys

import click

from .encode import DEFAULT_MODEL, EncodingError, ModelLoadError, embed_catalog, embed_queries
from .rawcat import RawParseError, RawCatalogError


def _fail(message: str, code: int) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _run(fn, raw_path: str, out_path: str, model: str, batch_size: int, device: str | None) -> None:
    try:
        fn(raw_path, out_path, model, batch_size=batch_size, device=device)
    except (OSError, RawParseError) as exc:
        _fail(str(exc), 2)
    except (RawCatalogError, ModelLoadError, EncodingError) as exc:
        _fail(str(exc), 1)


def _io_options(fn):
    fn = click.option("--in", "raw_path", required=True, help="input JSON file")(fn)
    fn = click.option("--out", "out_path", required=True, help="output JSON file")(fn)
    fn = click.option("--model", default=DEFAULT_MODEL, show_default=True)(fn)
    fn = click.option("--batch-size", default=32, show_default=True, type=click.IntRange(min=1))(fn)
    fn = click.option("--device", default=None, help="torch device, e.g. cpu (default: auto)")(fn)
    return fn


@click.group()
def main() -> None:
    """Embed raw catalog/query text into the engine's JSON formats."""


@main.command()
@_io_options
def catalog(raw_path: str, out_path: str, model: str, batch_size: int, device: str | None) -> None:
    """Embed an embedding-free catalog into a full catalog file."""
    _run(embed_catalog, raw_path, out_path, model, batch_size, device)
    click.echo(f"wrote {out_path}")


@main.command()
@_io_options
def queries(raw_path: str, out_path: str, model: str, batch_size: int, device: str | None) -> None:
    """Embed raw query records into a test-case file."""
    _run(embed_queries, raw_path, out_path, model, batch_size, device)
    click.echo(f"wrote {out_path}")


if __name__ == "__main__":
    main()
