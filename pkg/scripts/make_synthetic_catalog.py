#!/usr/bin/env python3
"""Generate a planted-blob catalog plus offline fixtures.

Writes catalog.json, cases.json, embeddings.json, mock_rules.json and
gated_rules.json into --out, ready for the toolselect CLI, e.g.:

    python scripts/make_synthetic_catalog.py --out /tmp/world
    toolselect bench --catalog /tmp/world/catalog.json \
        --cases /tmp/world/cases.json --method hgmf \
        --client mock:/tmp/world/mock_rules.json \
        --embedder dict:/tmp/world/embeddings.json
"""

import click

from toolselect.synthetic import make_planted_world, write_world


@click.command()
@click.option("--servers", default=16, show_default=True)
@click.option("--tools-per-server", default=8, show_default=True)
@click.option("--dim", default=384, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--cases", default=50, show_default=True)
@click.option("--tool-radius", default=0.12, show_default=True)
@click.option("--query-radius", default=0.05, show_default=True)
@click.option("--out", required=True, type=click.Path(file_okay=False))
def main(servers, tools_per_server, dim, seed, cases, tool_radius, query_radius, out):
    world = make_planted_world(
        n_servers=servers,
        tools_per_server=tools_per_server,
        dimension=dim,
        seed=seed,
        n_cases=cases,
        tool_radius=tool_radius,
        query_radius=query_radius,
    )
    paths = write_world(world, out)
    click.echo(
        f"planted world: {world.catalog.n_servers} servers, "
        f"{world.catalog.n_tools} tools, d={world.catalog.dimension}, "
        f"{len(world.cases)} cases"
    )
    for name, path in paths.items():
        click.echo(f"  {name}: {path}")


if __name__ == "__main__":
    main()
