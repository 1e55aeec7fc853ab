"""Exact-match benchmark over exponentially scaled catalog tiers.

For every tier size and every test case, the full catalog is subsampled
down to the tier size with the case's ground-truth tool forced in, the
chosen method runs end to end on the subset, and the prediction counts as
correct only when both the server and the tool match the truth. Latency
covers pruning + reranking compute; LLM round trips are tracked separately
because they measure the endpoint, not the method.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from . import baselines
from .baselines import BaselineKind
from .catalog import ToolCatalog, subset_catalog
from .gmm import component_count
from .pruner import CandidateSet, PruneConfig, prune
from .rerank import Embedder, LlmClient, RankedPair, run_selection
from .vecmath import l2_normalize

DEFAULT_TIERS = (1, 3, 8, 21, 41, 107, 278, 401, 1721, 2797)
HGMF_METHOD = "hgmf"
METHOD_NAMES = (HGMF_METHOD,) + tuple(k.value for k in BaselineKind)


@dataclass(frozen=True)
class TestCase:
    """One benchmark query with its precomputed embedding and ground truth."""

    __test__ = False  # not a pytest class, despite the name

    query: str
    query_embedding: np.ndarray
    truth_server_id: str
    truth_tool_id: str


@dataclass(frozen=True)
class BaselineParams:
    """Knobs for the comparison selectors.

    budget None means "match the hierarchical pruner": each case first runs
    the GMM pruning on its subset (untimed) and hands the resulting
    candidate-set size to the baseline, so both methods rerank equally many
    tools. k_clusters None uses the ceil-sqrt heuristic on the subset size.
    """

    budget: int | None = None
    k_clusters: int | None = None
    n_nearest: int = 4
    eps: float = 0.4
    min_pts: int = 3


@dataclass(frozen=True)
class LatencySummary:
    p50_ms: float
    p95_ms: float
    mean_ms: float

    @classmethod
    def from_samples(cls, samples: Sequence[float]) -> "LatencySummary":
        if not samples:
            return cls(0.0, 0.0, 0.0)
        arr = np.asarray(samples, dtype=np.float64)
        return cls(
            p50_ms=float(np.percentile(arr, 50)),
            p95_ms=float(np.percentile(arr, 95)),
            mean_ms=float(arr.mean()),
        )


@dataclass(frozen=True)
class TierResult:
    sample_size: int
    n_cases: int
    n_correct: int
    n_failures: int
    accuracy: float
    latency: LatencySummary
    llm_latency: LatencySummary


@dataclass(frozen=True)
class BenchmarkReport:
    method: str
    model: str
    seed: int
    tiers: tuple[TierResult, ...]
    overall: float
    config: Mapping[str, Any]
    timestamp: str


def exact_match(predicted: RankedPair, truth: TestCase) -> bool:
    """True only when both the server and the tool match the ground truth."""
    return (
        predicted.server_id == truth.truth_server_id
        and predicted.tool_id == truth.truth_tool_id
    )


def _case_seed(seed: int, tier_index: int, case_index: int) -> int:
    ss = np.random.SeedSequence([seed, tier_index, case_index])
    return int(ss.generate_state(1)[0])


def _baseline_candidates(
    kind: BaselineKind,
    sub: ToolCatalog,
    case: TestCase,
    params: BaselineParams,
    budget: int,
    case_seed: int,
) -> CandidateSet:
    k_clusters = params.k_clusters or component_count(sub.n_tools)
    if kind is BaselineKind.MCP_ZERO:
        return baselines.mcp_zero(sub, budget, case_seed)
    if kind is BaselineKind.TOKENIZATION:
        return baselines.tokenization_select(sub, case.query, budget)
    if kind is BaselineKind.KMEANS:
        return baselines.kmeans_select(
            sub, case.query_embedding, k_clusters, params.n_nearest, case_seed
        )
    if kind is BaselineKind.CLUSTER_WEIGHTED:
        return baselines.cluster_weighted_select(
            sub, case.query_embedding, k_clusters, params.n_nearest, budget, case_seed
        )
    if kind is BaselineKind.DENSITY_BASED:
        return baselines.density_select(
            sub, case.query_embedding, params.eps, params.min_pts
        )
    raise ValueError(f"unhandled baseline kind: {kind}")


def _run_case(
    catalog: ToolCatalog,
    case: TestCase,
    sample_size: int,
    method: str,
    client: LlmClient,
    embedder: Embedder,
    prune_cfg: PruneConfig,
    params: BaselineParams,
    case_seed: int,
) -> tuple[bool, float, float]:
    """Returns (correct, compute_ms, llm_ms) for one (tier, case) cell."""
    sub = subset_catalog(
        catalog, sample_size, case_seed, force_include=(case.truth_tool_id,)
    )
    if method == HGMF_METHOD:
        outcome = run_selection(
            case.query, sub, prune_cfg, client, embedder,
            query_embedding=case.query_embedding,
        )
        compute_ms = outcome.prune_ms + outcome.rerank_ms
    else:
        kind = BaselineKind(method)
        budget = params.budget
        needs_budget = kind in (
            BaselineKind.MCP_ZERO, BaselineKind.TOKENIZATION, BaselineKind.CLUSTER_WEIGHTED
        )
        if budget is None and needs_budget:
            qv = l2_normalize(case.query_embedding)
            budget = len(prune(sub, qv, prune_cfg).tools)
        t0 = time.perf_counter()
        candidates = _baseline_candidates(
            kind, sub, case, params, budget if budget is not None else 1, case_seed
        )
        select_ms = (time.perf_counter() - t0) * 1e3
        outcome = run_selection(
            case.query, sub, prune_cfg, client, embedder,
            query_embedding=case.query_embedding, candidates=candidates,
        )
        compute_ms = select_ms + outcome.rerank_ms
    return exact_match(outcome.best, case), compute_ms, outcome.llm_ms


def run_benchmark(
    catalog: ToolCatalog,
    cases: Sequence[TestCase],
    tiers: Sequence[int],
    method: str,
    client: LlmClient,
    embedder: Embedder,
    seed: int = 0,
    prune_cfg: PruneConfig | None = None,
    baseline_params: BaselineParams | None = None,
    model: str = "mock",
    jobs: int = 1,
) -> BenchmarkReport:
    """Run every case at every tier and aggregate exact-match accuracy.

    Per-case pipeline errors count as incorrect instead of aborting, so a
    flaky endpoint degrades accuracy rather than killing the run. The
    per-case subset and any baseline sampling derive their seeds from
    (seed, tier index, case index), making accuracy results independent of
    execution order and of the --jobs setting.
    """
    if not catalog.normalized:
        raise ValueError("benchmark requires a normalized catalog")
    if not cases:
        raise ValueError("cases must be non-empty")
    tiers = list(tiers)
    if not tiers or sorted(tiers) != tiers:
        raise ValueError("tiers must be non-empty and sorted ascending")
    if tiers[0] < 1 or tiers[-1] > catalog.n_tools:
        raise ValueError(f"tiers must lie in [1, {catalog.n_tools}]")
    if method not in METHOD_NAMES:
        raise ValueError(f"unknown method {method!r}; valid: {', '.join(METHOD_NAMES)}")
    for case in cases:
        if not catalog.has_tool(case.truth_tool_id):
            raise ValueError(f"case truth tool '{case.truth_tool_id}' not in catalog")
        owner = catalog.tool_by_id(case.truth_tool_id).server_id
        if owner != case.truth_server_id:
            raise ValueError(
                f"case truth tool '{case.truth_tool_id}' belongs to '{owner}', "
                f"not '{case.truth_server_id}'"
            )
    prune_cfg = prune_cfg or PruneConfig()
    params = baseline_params or BaselineParams()

    tier_results = []
    for tier_index, sample_size in enumerate(tiers):
        def one(case_index: int) -> tuple[bool, float, float] | None:
            try:
                return _run_case(
                    catalog, cases[case_index], sample_size, method, client,
                    embedder, prune_cfg, params,
                    _case_seed(seed, tier_index, case_index),
                )
            except Exception:
                return None

        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                outcomes = list(pool.map(one, range(len(cases))))
        else:
            outcomes = [one(i) for i in range(len(cases))]

        n_correct = sum(1 for o in outcomes if o is not None and o[0])
        n_failures = sum(1 for o in outcomes if o is None)
        compute = [o[1] for o in outcomes if o is not None]
        llm = [o[2] for o in outcomes if o is not None]
        tier_results.append(
            TierResult(
                sample_size=sample_size,
                n_cases=len(cases),
                n_correct=n_correct,
                n_failures=n_failures,
                accuracy=n_correct / len(cases),
                latency=LatencySummary.from_samples(compute),
                llm_latency=LatencySummary.from_samples(llm),
            )
        )

    total_cases = sum(t.n_cases for t in tier_results)
    total_correct = sum(t.n_correct for t in tier_results)
    config = {
        "tiers": tiers,
        "n_cases_per_tier": len(cases),
        "jobs": jobs,
        "prune": {
            "top_server_clusters": prune_cfg.top_server_clusters,
            "top_tool_clusters": prune_cfg.top_tool_clusters,
            "min_catalog_for_clustering": prune_cfg.min_catalog_for_clustering,
            "gmm": {
                "max_iters": prune_cfg.gmm_cfg.max_iters,
                "tol": prune_cfg.gmm_cfg.tol,
                "var_floor": prune_cfg.gmm_cfg.var_floor,
                "seed": prune_cfg.gmm_cfg.seed,
                "n_init": prune_cfg.gmm_cfg.n_init,
            },
        },
        "baseline": {
            "budget": params.budget,
            "k_clusters": params.k_clusters,
            "n_nearest": params.n_nearest,
            "eps": params.eps,
            "min_pts": params.min_pts,
        },
    }
    return BenchmarkReport(
        method=method,
        model=model,
        seed=seed,
        tiers=tuple(tier_results),
        overall=total_correct / total_cases,
        config=config,
        timestamp=datetime.now(timezone.utc).isoformat(),
    )


def report_to_dict(report: BenchmarkReport) -> dict:
    return {
        "method": report.method,
        "model": report.model,
        "seed": report.seed,
        "overall": report.overall,
        "timestamp": report.timestamp,
        "config": dict(report.config),
        "tiers": [
            {
                "sample_size": t.sample_size,
                "n_cases": t.n_cases,
                "n_correct": t.n_correct,
                "n_failures": t.n_failures,
                "accuracy": t.accuracy,
                "latency_ms": {
                    "p50": t.latency.p50_ms,
                    "p95": t.latency.p95_ms,
                    "mean": t.latency.mean_ms,
                },
                "llm_latency_ms": {
                    "p50": t.llm_latency.p50_ms,
                    "p95": t.llm_latency.p95_ms,
                    "mean": t.llm_latency.mean_ms,
                },
            }
            for t in report.tiers
        ],
    }


def report_from_dict(data: Mapping[str, Any]) -> BenchmarkReport:
    tiers = tuple(
        TierResult(
            sample_size=t["sample_size"],
            n_cases=t["n_cases"],
            n_correct=t["n_correct"],
            n_failures=t["n_failures"],
            accuracy=t["accuracy"],
            latency=LatencySummary(
                p50_ms=t["latency_ms"]["p50"],
                p95_ms=t["latency_ms"]["p95"],
                mean_ms=t["latency_ms"]["mean"],
            ),
            llm_latency=LatencySummary(
                p50_ms=t["llm_latency_ms"]["p50"],
                p95_ms=t["llm_latency_ms"]["p95"],
                mean_ms=t["llm_latency_ms"]["mean"],
            ),
        )
        for t in data["tiers"]
    )
    return BenchmarkReport(
        method=data["method"],
        model=data["model"],
        seed=data["seed"],
        tiers=tiers,
        overall=data["overall"],
        config=data["config"],
        timestamp=data["timestamp"],
    )


def write_report(report: BenchmarkReport, path: str | Path, format: str = "json") -> None:
    """JSON carries the full report; CSV is one row per tier with columns
    method,model,shot,accuracy,p50_ms,p95_ms."""
    path = Path(path)
    if format == "json":
        path.write_text(json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n")
    elif format == "csv":
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["method", "model", "shot", "accuracy", "p50_ms", "p95_ms"])
            for t in report.tiers:
                writer.writerow(
                    [
                        report.method,
                        report.model,
                        t.sample_size,
                        f"{t.accuracy:.6f}",
                        f"{t.latency.p50_ms:.3f}",
                        f"{t.latency.p95_ms:.3f}",
                    ]
                )
    else:
        raise ValueError(f"unknown report format {format!r}; valid: json, csv")


def read_report(path: str | Path) -> BenchmarkReport:
    return report_from_dict(json.loads(Path(path).read_text()))


def load_cases(path: str | Path, dimension: int | None = None) -> list[TestCase]:
    """Parse the test-case file: a JSON array of objects with keys query,
    query_embedding, server_id, tool_id."""
    data = json.loads(Path(path).read_text())
    if not isinstance(data, list):
        raise ValueError("test-case file must be a JSON array")
    cases = []
    for pos, entry in enumerate(data):
        for key in ("query", "query_embedding", "server_id", "tool_id"):
            if key not in entry:
                raise ValueError(f"case {pos} is missing key '{key}'")
        emb = np.asarray(entry["query_embedding"], dtype=np.float64)
        if emb.ndim != 1 or not np.all(np.isfinite(emb)):
            raise ValueError(f"case {pos} has a malformed query_embedding")
        if dimension is not None and emb.shape != (dimension,):
            raise ValueError(
                f"case {pos} embedding has length {emb.shape[0]}, expected {dimension}"
            )
        cases.append(
            TestCase(
                query=str(entry["query"]),
                query_embedding=emb,
                truth_server_id=str(entry["server_id"]),
                truth_tool_id=str(entry["tool_id"]),
            )
        )
    return cases


def save_cases(cases: Sequence[TestCase], path: str | Path) -> None:
    payload = [
        {
            "query": c.query,
            "query_embedding": [float(x) for x in c.query_embedding],
            "server_id": c.truth_server_id,
            "tool_id": c.truth_tool_id,
        }
        for c in cases
    ]
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")
