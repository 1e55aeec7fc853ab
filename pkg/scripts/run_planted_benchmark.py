#!/usr/bin/env python3
"""Run every method on a planted world with the candidate-gated mock LLM.

The gated mock confirms the ground truth only when it appears among the
candidates, so each method's accuracy equals its candidate recall. Emits
one CSV row per (method, tier) — the data behind an accuracy-vs-scale plot.
"""

import sys
from pathlib import Path

import click

from toolselect.bench import BaselineParams, run_benchmark, write_report
from toolselect.bench import METHOD_NAMES
from toolselect.synthetic import make_planted_world


@click.command()
@click.option("--servers", default=16, show_default=True)
@click.option("--tools-per-server", default=8, show_default=True)
@click.option("--dim", default=384, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--cases", default=50, show_default=True)
@click.option("--budget", default=4, show_default=True,
              help="Candidate budget for the sampling baselines.")
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
def main(servers, tools_per_server, dim, seed, cases, budget, out_dir):
    world = make_planted_world(
        n_servers=servers, tools_per_server=tools_per_server,
        dimension=dim, seed=seed, n_cases=cases,
    )
    n = world.catalog.n_tools
    tiers = sorted({1, 3, 8, max(1, n // 4), max(1, n // 2), n})
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    for method in METHOD_NAMES:
        report = run_benchmark(
            world.catalog,
            list(world.cases),
            tiers,
            method,
            world.gated_client(),
            world.embedder(),
            seed=seed,
            baseline_params=BaselineParams(budget=budget),
            model="gated-mock",
        )
        write_report(report, out_dir / f"{method}.json", format="json")
        write_report(report, out_dir / f"{method}.csv", format="csv")
        accs = " ".join(f"{t.sample_size}:{t.accuracy:.2f}" for t in report.tiers)
        click.echo(f"{method:17s} overall={report.overall:.3f}  {accs}")
    click.echo(f"reports in {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
