"""Comparison selectors that produce candidate sets of a requested size.

Each baseline emits the same CandidateSet shape as the hierarchical pruner
so the identical rerank stage runs downstream and the pruning strategy is
the only variable. Candidate log densities are None: these selectors have
no mixture likelihood to report.

The source material describes each baseline in a single line; the scoring
details here (Jaccard token overlap, Lloyd's algorithm, the 1e-6 weight
floor, the DBSCAN medoid rule) are the most standard readings.
"""

from __future__ import annotations

import enum
import re
from typing import Sequence

import numpy as np

from .catalog import ToolCatalog, ToolRecord
from .gmm import component_count
from .kmeans import lloyd
from .pruner import CandidateSet, ServerCandidate, ToolCandidate
from .vecmath import l2_normalize

WEIGHT_FLOOR = 1e-6


class BaselineKind(enum.Enum):
    MCP_ZERO = "mcp-zero"
    TOKENIZATION = "tokenize"
    KMEANS = "kmeans"
    CLUSTER_WEIGHTED = "cluster-weighted"
    DENSITY_BASED = "density"


def _candidate_set(
    catalog: ToolCatalog, tools: Sequence[ToolRecord], provenance: dict
) -> CandidateSet:
    server_ids = sorted({t.server_id for t in tools})
    servers = tuple(ServerCandidate(server_id=sid, log_density=None) for sid in server_ids)
    tool_candidates = tuple(
        ToolCandidate(tool_id=t.tool_id, server_id=t.server_id, log_density=None)
        for t in sorted(tools, key=lambda t: (t.server_id, t.tool_id))
    )
    return CandidateSet(servers=servers, tools=tool_candidates, provenance=provenance)


def _check_query(catalog: ToolCatalog, query_embedding: np.ndarray) -> np.ndarray:
    q = np.asarray(query_embedding, dtype=np.float64)
    if q.shape != (catalog.dimension,):
        raise ValueError(
            f"query embedding has shape {q.shape}, catalog dimension is {catalog.dimension}"
        )
    return l2_normalize(q)


def mcp_zero(catalog: ToolCatalog, budget: int, seed: int) -> CandidateSet:
    """Uniform sample of min(budget, N) tools without replacement."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    take = min(budget, catalog.n_tools)
    rng = np.random.default_rng(seed)
    idx = rng.choice(catalog.n_tools, size=take, replace=False)
    tools = [catalog.tools[i] for i in idx]
    return _candidate_set(
        catalog, tools, {"method": "mcp-zero", "budget": budget, "seed": seed}
    )


def _token_set(text: str) -> frozenset[str]:
    return frozenset(re.findall(r"[a-z0-9]+", text.lower()))


def _jaccard(a: frozenset[str], b: frozenset[str]) -> float:
    union = len(a | b)
    if union == 0:
        return 0.0
    return len(a & b) / union


def tokenization_select(catalog: ToolCatalog, query: str, budget: int) -> CandidateSet:
    """Top-budget tools by Jaccard overlap between the query's token set and
    each tool's name+description token set; ties broken by tool_id."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    query_tokens = _token_set(query)
    scored = sorted(
        catalog.tools,
        key=lambda t: (
            -_jaccard(query_tokens, _token_set(f"{t.name} {t.description}")),
            t.tool_id,
        ),
    )
    tools = scored[: min(budget, catalog.n_tools)]
    return _candidate_set(
        catalog, tools, {"method": "tokenize", "budget": budget}
    )


def _centroid_clusters(
    catalog: ToolCatalog, q: np.ndarray, k_clusters: int, n_nearest: int, seed: int
) -> tuple[np.ndarray, np.ndarray, list[int]]:
    """Shared clustering step: Lloyd k-means over tool embeddings, then the
    n_nearest cluster ids by cosine from query to centroid.

    Returns (labels, per-cluster cosine, selected cluster ids). Selection
    extends past n_nearest only while the chosen clusters are empty, so the
    result always contains at least one tool.
    """
    if k_clusters < 1 or n_nearest < 1:
        raise ValueError("k_clusters and n_nearest must be >= 1")
    points = np.stack([t.embedding for t in catalog.tools])
    k = min(k_clusters, points.shape[0])
    centers, labels = lloyd(points, k, seed)
    norms = np.linalg.norm(centers, axis=1)
    # A centroid can only be ~zero if its members cancel out; score it last.
    safe = np.where(norms < 1e-12, 1.0, norms)
    cos = np.where(norms < 1e-12, -1.0, (centers @ q) / safe)
    order = sorted(range(k), key=lambda j: (-cos[j], j))
    sizes = np.bincount(labels, minlength=k)

    cutoff = 0
    members = 0
    for pos, cluster in enumerate(order):
        members += int(sizes[cluster])
        cutoff = pos + 1
        if cutoff >= n_nearest and members > 0:
            break
    return labels, cos, order[:cutoff]


def kmeans_select(
    catalog: ToolCatalog,
    query_embedding: np.ndarray,
    k_clusters: int,
    n_nearest: int,
    seed: int,
) -> CandidateSet:
    """All tools of the n_nearest k-means clusters whose centroids are
    closest to the query by cosine. k_clusters above N is clamped to N."""
    q = _check_query(catalog, query_embedding)
    labels, _, selected = _centroid_clusters(catalog, q, k_clusters, n_nearest, seed)
    keep = np.isin(labels, selected)
    tools = [t for t, f in zip(catalog.tools, keep) if f]
    return _candidate_set(
        catalog,
        tools,
        {
            "method": "kmeans",
            "k_clusters": k_clusters,
            "n_nearest": n_nearest,
            "seed": seed,
            "clusters": [int(c) for c in selected],
        },
    )


def cluster_weighted_select(
    catalog: ToolCatalog,
    query_embedding: np.ndarray,
    k_clusters: int,
    n_nearest: int,
    budget: int,
    seed: int,
) -> CandidateSet:
    """Within the n_nearest clusters, sample budget tools without replacement
    with probability proportional to max(cosine(query, tool), 1e-6)."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    q = _check_query(catalog, query_embedding)
    labels, _, selected = _centroid_clusters(catalog, q, k_clusters, n_nearest, seed)
    keep = np.nonzero(np.isin(labels, selected))[0]
    weights = np.array(
        [max(float(np.dot(q, catalog.tools[i].embedding)), WEIGHT_FLOOR) for i in keep]
    )
    take = min(budget, keep.size)
    rng = np.random.default_rng(seed)
    idx = rng.choice(keep, size=take, replace=False, p=weights / weights.sum())
    tools = [catalog.tools[i] for i in idx]
    return _candidate_set(
        catalog,
        tools,
        {
            "method": "cluster-weighted",
            "k_clusters": k_clusters,
            "n_nearest": n_nearest,
            "budget": budget,
            "seed": seed,
        },
    )


def _dbscan_labels(distance: np.ndarray, eps: float, min_pts: int) -> np.ndarray:
    """Plain DBSCAN over a precomputed distance matrix; noise stays -1.

    Points within eps of a core point join its cluster; a point's own
    neighborhood includes itself, matching the usual min_pts convention.
    """
    n = distance.shape[0]
    neighborhoods = [np.nonzero(distance[i] <= eps)[0] for i in range(n)]
    core = np.array([len(nb) >= min_pts for nb in neighborhoods])
    labels = np.full(n, -1, dtype=np.int64)
    cluster = 0
    for i in range(n):
        if labels[i] != -1 or not core[i]:
            continue
        labels[i] = cluster
        frontier = [i]
        while frontier:
            j = frontier.pop()
            for nb in neighborhoods[j]:
                if labels[nb] == -1:
                    labels[nb] = cluster
                    if core[nb]:
                        frontier.append(nb)
        cluster += 1
    return labels


def density_select(
    catalog: ToolCatalog, query_embedding: np.ndarray, eps: float, min_pts: int
) -> CandidateSet:
    """DBSCAN over tool embeddings with distance 1 - cosine; returns every
    member of the cluster whose medoid is nearest the query. Noise points
    become singleton fallback clusters, so the result is never empty."""
    if not 0.0 < eps < 2.0:
        raise ValueError("eps must lie in (0, 2)")
    if min_pts < 1:
        raise ValueError("min_pts must be >= 1")
    q = _check_query(catalog, query_embedding)
    points = np.stack([t.embedding for t in catalog.tools])
    distance = np.clip(1.0 - points @ points.T, 0.0, 2.0)
    labels = _dbscan_labels(distance, eps, min_pts)

    next_label = labels.max() + 1
    for i in np.nonzero(labels == -1)[0]:
        labels[i] = next_label
        next_label += 1

    query_dist = 1.0 - points @ q
    best_label = -1
    best_dist = np.inf
    for label in range(next_label):
        members = np.nonzero(labels == label)[0]
        within = distance[np.ix_(members, members)]
        medoid = members[int(np.argmin(within.sum(axis=1)))]
        d = float(query_dist[medoid])
        if d < best_dist:
            best_dist = d
            best_label = label
    tools = [t for t, l in zip(catalog.tools, labels == best_label) if l]
    return _candidate_set(
        catalog,
        tools,
        {"method": "density", "eps": eps, "min_pts": min_pts, "cluster_size": len(tools)},
    )
