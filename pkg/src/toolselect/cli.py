"""Command-line front door: validate catalogs, prune, select, benchmark.

Exit codes are a stable contract for CI: 0 success, 1 runtime failure,
2 usage error (click's convention).
"""

from __future__ import annotations

import dataclasses
import json
import sys
from pathlib import Path

import click
import numpy as np

from .bench import (
    DEFAULT_TIERS,
    METHOD_NAMES,
    BaselineParams,
    load_cases,
    report_to_dict,
    run_benchmark,
    write_report,
)
from .catalog import ToolCatalog, index_tools, load_catalog, normalize_catalog
from .clients import DictEmbedder, HttpEmbedder, MockLlmClient, OpenAiChatClient
from .gmm import FitConfig
from .pruner import PruneConfig, prune
from .rerank import run_selection
from .synthetic import CandidateGatedMockClient
from .vecmath import l2_normalize


def _load_normalized(catalog_path: str, tool_cap: int) -> ToolCatalog:
    catalog = load_catalog(catalog_path)
    if tool_cap > 0:
        catalog = index_tools(catalog, tool_cap)
    return normalize_catalog(catalog)


def _make_client(spec: str, base_url: str):
    kind, _, arg = spec.partition(":")
    if kind == "mock" and arg:
        return MockLlmClient.from_json(arg)
    if kind == "gated" and arg:
        return CandidateGatedMockClient.from_json(arg)
    if kind == "openai" and arg:
        return OpenAiChatClient(model=arg, base_url=base_url)
    raise click.UsageError(
        f"bad --client {spec!r}; use mock:<rules.json>, gated:<rules.json>, "
        "or openai:<model>"
    )


def _make_embedder(spec: str, base_url: str):
    kind, _, arg = spec.partition(":")
    if kind == "dict" and arg:
        return DictEmbedder.from_json(arg)
    if kind == "http" and arg:
        return HttpEmbedder(model=arg, base_url=base_url)
    raise click.UsageError(
        f"bad --embedder {spec!r}; use dict:<table.json> or http:<model>"
    )


def _read_embedding(path: str) -> np.ndarray:
    data = json.loads(Path(path).read_text())
    vec = np.asarray(data, dtype=np.float64)
    if vec.ndim != 1:
        raise click.ClickException(f"{path} must hold a flat JSON array of floats")
    return vec


def _query_vector(query, query_embedding_path, embedder_spec, embeddings_base_url):
    if query_embedding_path:
        return _read_embedding(query_embedding_path)
    if query is None:
        raise click.UsageError("provide --query or --query-embedding")
    if embedder_spec is None:
        raise click.UsageError("--query without --query-embedding requires --embedder")
    embedder = _make_embedder(embedder_spec, embeddings_base_url)
    try:
        return embedder.embed([query])[0]
    except Exception as exc:
        raise click.ClickException(f"embedding the query failed: {exc}")


@click.group()
def main() -> None:
    """Hierarchical GMM tool retrieval: prune a server/tool catalog to a
    handful of candidates, then rerank with ideal-description matching."""


@main.command("validate")
@click.argument("catalog_path", type=click.Path(exists=True, dir_okay=False))
def cmd_validate(catalog_path: str) -> None:
    """Load and normalize a catalog file, printing a size summary."""
    try:
        catalog = load_catalog(catalog_path)
        normalize_catalog(catalog)
    except Exception as exc:
        raise click.ClickException(str(exc))
    click.echo(f"servers={catalog.n_servers} tools={catalog.n_tools} dim={catalog.dimension}")


@main.command("prune")
@click.option("--catalog", "catalog_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--query", default=None, help="Query text; embedded via --embedder.")
@click.option("--query-embedding", "query_embedding_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON array of floats; skips the embedding call.")
@click.option("--embedder", "embedder_spec", default=None,
              help="dict:<table.json> or http:<model>.")
@click.option("--embeddings-base-url", default="https://api.openai.com/v1", show_default=True)
@click.option("--ns", default=4, show_default=True, help="Server clusters kept.")
@click.option("--nt", default=4, show_default=True, help="Tool clusters kept per server.")
@click.option("--min-cluster", default=10, show_default=True,
              help="Catalogs with fewer tools skip clustering.")
@click.option("--tool-cap", default=10, show_default=True,
              help="Max tools indexed per server at load; 0 disables.")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", default=None, type=click.Path(), help="Write JSON here instead of stdout.")
def cmd_prune(catalog_path, query, query_embedding_path, embedder_spec,
              embeddings_base_url, ns, nt, min_cluster, tool_cap, seed, out) -> None:
    """Run two-stage pruning and emit the candidate set as JSON."""
    q = _query_vector(query, query_embedding_path, embedder_spec, embeddings_base_url)
    try:
        catalog = _load_normalized(catalog_path, tool_cap)
        cfg = PruneConfig(
            top_server_clusters=ns,
            top_tool_clusters=nt,
            min_catalog_for_clustering=min_cluster,
            gmm_cfg=FitConfig(seed=seed),
        )
        candidates = prune(catalog, l2_normalize(q), cfg)
    except Exception as exc:
        raise click.ClickException(str(exc))
    payload = json.dumps(candidates.to_dict(), indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(payload)
        click.echo(f"wrote {out}")
    else:
        click.echo(payload, nl=False)


@main.command("select")
@click.option("--catalog", "catalog_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--query", required=True)
@click.option("--query-embedding", "query_embedding_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--client", "client_spec", required=True,
              help="mock:<rules.json>, gated:<rules.json>, or openai:<model>.")
@click.option("--embedder", "embedder_spec", required=True,
              help="dict:<table.json> or http:<model>.")
@click.option("--llm-base-url", default="https://api.openai.com/v1", show_default=True)
@click.option("--embeddings-base-url", default="https://api.openai.com/v1", show_default=True)
@click.option("--ns", default=4, show_default=True)
@click.option("--nt", default=4, show_default=True)
@click.option("--min-cluster", default=10, show_default=True)
@click.option("--tool-cap", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True)
def cmd_select(catalog_path, query, query_embedding_path, client_spec, embedder_spec,
               llm_base_url, embeddings_base_url, ns, nt, min_cluster, tool_cap, seed) -> None:
    """Run the full pipeline and print the best (server, tool) pair."""
    client = _make_client(client_spec, llm_base_url)
    embedder = _make_embedder(embedder_spec, embeddings_base_url)
    q = _read_embedding(query_embedding_path) if query_embedding_path else None
    try:
        catalog = _load_normalized(catalog_path, tool_cap)
        cfg = PruneConfig(
            top_server_clusters=ns,
            top_tool_clusters=nt,
            min_catalog_for_clustering=min_cluster,
            gmm_cfg=FitConfig(seed=seed),
        )
        outcome = run_selection(query, catalog, cfg, client, embedder, query_embedding=q)
    except Exception as exc:
        raise click.ClickException(str(exc))
    click.echo(
        json.dumps(
            {
                "best": dataclasses.asdict(outcome.best),
                "used_fallback": outcome.used_fallback,
                "prune_ms": outcome.prune_ms,
                "rerank_ms": outcome.rerank_ms,
                "llm_ms": outcome.llm_ms,
                "n_candidates": len(outcome.candidates.tools),
            },
            indent=2,
            sort_keys=True,
        )
    )


@main.command("bench")
@click.option("--catalog", "catalog_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--cases", "cases_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--method", required=True, type=click.Choice(METHOD_NAMES))
@click.option("--client", "client_spec", required=True)
@click.option("--embedder", "embedder_spec", required=True)
@click.option("--llm-base-url", default="https://api.openai.com/v1", show_default=True)
@click.option("--embeddings-base-url", default="https://api.openai.com/v1", show_default=True)
@click.option("--tiers", default=None,
              help="Comma-separated sample sizes; default: standard tiers clipped to N.")
@click.option("--model", default=None, help="Model label recorded in the report.")
@click.option("--seed", default=0, show_default=True)
@click.option("--budget", default=None, type=int,
              help="Baseline candidate budget; default matches the pruner per case.")
@click.option("--k-clusters", default=None, type=int)
@click.option("--n-nearest", default=4, show_default=True)
@click.option("--eps", default=0.4, show_default=True)
@click.option("--min-pts", default=3, show_default=True)
@click.option("--ns", default=4, show_default=True)
@click.option("--nt", default=4, show_default=True)
@click.option("--min-cluster", default=10, show_default=True)
@click.option("--tool-cap", default=10, show_default=True)
@click.option("--jobs", default=1, show_default=True)
@click.option("--out", default=None, type=click.Path())
@click.option("--format", "fmt", default="json", type=click.Choice(["json", "csv"]), show_default=True)
def cmd_bench(catalog_path, cases_path, method, client_spec, embedder_spec,
              llm_base_url, embeddings_base_url, tiers, model, seed, budget,
              k_clusters, n_nearest, eps, min_pts, ns, nt, min_cluster,
              tool_cap, jobs, out, fmt) -> None:
    """Run the tiered exact-match benchmark and write a report."""
    client = _make_client(client_spec, llm_base_url)
    embedder = _make_embedder(embedder_spec, embeddings_base_url)
    if model is None:
        kind, _, arg = client_spec.partition(":")
        model = arg if kind == "openai" else kind
    try:
        catalog = _load_normalized(catalog_path, tool_cap)
        cases = load_cases(cases_path, dimension=catalog.dimension)
        if tiers:
            tier_list = [int(t) for t in tiers.split(",")]
        else:
            tier_list = [t for t in DEFAULT_TIERS if t <= catalog.n_tools]
            if not tier_list or tier_list[-1] != catalog.n_tools:
                tier_list.append(catalog.n_tools)
        report = run_benchmark(
            catalog,
            cases,
            tier_list,
            method,
            client,
            embedder,
            seed=seed,
            prune_cfg=PruneConfig(
                top_server_clusters=ns,
                top_tool_clusters=nt,
                min_catalog_for_clustering=min_cluster,
                gmm_cfg=FitConfig(seed=seed),
            ),
            baseline_params=BaselineParams(
                budget=budget, k_clusters=k_clusters, n_nearest=n_nearest,
                eps=eps, min_pts=min_pts,
            ),
            model=model,
            jobs=jobs,
        )
    except Exception as exc:
        raise click.ClickException(str(exc))
    for t in report.tiers:
        click.echo(
            f"tier {t.sample_size}: accuracy={t.accuracy:.3f} "
            f"({t.n_correct}/{t.n_cases}, failures={t.n_failures}) "
            f"p50={t.latency.p50_ms:.1f}ms p95={t.latency.p95_ms:.1f}ms",
            err=True,
        )
    click.echo(f"overall accuracy: {report.overall:.4f}", err=True)
    if out:
        write_report(report, out, format=fmt)
        click.echo(f"wrote {out}")
    else:
        click.echo(json.dumps(report_to_dict(report), indent=2, sort_keys=True))


if __name__ == "__main__":
    sys.exit(main())
