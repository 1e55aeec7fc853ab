"""Two-stage hierarchical pruning of the catalog.

Stage one clusters server embeddings with a GMM and keeps the servers
belonging to the clusters where the query is most likely. Stage two
repeats the procedure independently inside each surviving server's tool
set. The result is a compact candidate set that still contains everything
plausibly relevant.

Catalogs below a minimum size skip clustering entirely and pass through
whole: splitting a handful of points into sqrt-many Gaussians is noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .catalog import ToolCatalog
from .gmm import FitConfig, component_count, component_log_density, fit_gmm, rank_components


@dataclass(frozen=True)
class PruneConfig:
    """How many clusters survive at each level, and the EM settings."""

    top_server_clusters: int = 4
    top_tool_clusters: int = 4
    min_catalog_for_clustering: int = 10
    gmm_cfg: FitConfig = field(default_factory=FitConfig)

    def __post_init__(self) -> None:
        if self.top_server_clusters < 1 or self.top_tool_clusters < 1:
            raise ValueError("cluster selection counts must be >= 1")


@dataclass(frozen=True)
class ServerCandidate:
    server_id: str
    log_density: float | None


@dataclass(frozen=True)
class ToolCandidate:
    tool_id: str
    server_id: str
    log_density: float | None


@dataclass(frozen=True)
class CandidateSet:
    """Surviving servers and tools, with the query log-density of the
    cluster each one belongs to (None when no clustering ran)."""

    servers: tuple[ServerCandidate, ...]
    tools: tuple[ToolCandidate, ...]
    provenance: Mapping[str, Any]

    def server_ids(self) -> set[str]:
        return {s.server_id for s in self.servers}

    def tool_ids(self) -> set[str]:
        return {t.tool_id for t in self.tools}

    def to_dict(self) -> dict:
        return {
            "servers": [
                {"server_id": s.server_id, "log_density": s.log_density}
                for s in self.servers
            ],
            "tools": [
                {
                    "tool_id": t.tool_id,
                    "server_id": t.server_id,
                    "log_density": t.log_density,
                }
                for t in self.tools
            ],
            "provenance": dict(self.provenance),
        }


def _check_inputs(catalog: ToolCatalog, query_embedding: np.ndarray) -> np.ndarray:
    if not catalog.normalized:
        raise ValueError("pruning requires a normalized catalog")
    q = np.asarray(query_embedding, dtype=np.float64)
    if q.shape != (catalog.dimension,):
        raise ValueError(
            f"query embedding has shape {q.shape}, catalog dimension is {catalog.dimension}"
        )
    return q


def _select_by_clusters(
    vectors: np.ndarray, q: np.ndarray, top_n: int, gmm_cfg: FitConfig
) -> tuple[np.ndarray, np.ndarray, list[int]]:
    """Fit a GMM on `vectors`, rank its clusters by query log-density, and
    keep members of the best clusters.

    Returns (member_indices, per-member log-densities, selected cluster ids).
    The selection extends past top_n only if the leading clusters hold no
    points, so the result is never empty and growing top_n only ever adds
    members.
    """
    n = vectors.shape[0]
    k = component_count(n)
    model = fit_gmm(vectors, k, gmm_cfg)
    ranking = rank_components(model, q)
    sizes = np.bincount(model.assignments, minlength=model.k)

    cutoff = 0
    members_so_far = 0
    for rank_pos, cluster in enumerate(ranking):
        members_so_far += int(sizes[cluster])
        cutoff = rank_pos + 1
        if cutoff >= top_n and members_so_far > 0:
            break
    selected = ranking[:cutoff]

    density = {j: component_log_density(model, j, q) for j in selected}
    keep_mask = np.isin(model.assignments, selected)
    member_idx = np.nonzero(keep_mask)[0]
    member_density = np.array([density[int(model.assignments[i])] for i in member_idx])
    return member_idx, member_density, list(selected)


def prune_servers(
    catalog: ToolCatalog, query_embedding: np.ndarray, cfg: PruneConfig
) -> list[str]:
    """Server ids surviving the server-level cluster filter, in catalog order."""
    ids, _, _ = _prune_servers_detailed(catalog, query_embedding, cfg)
    return ids


def _prune_servers_detailed(
    catalog: ToolCatalog, query_embedding: np.ndarray, cfg: PruneConfig
) -> tuple[list[str], dict[str, float], list[int]]:
    q = _check_inputs(catalog, query_embedding)
    vectors = np.stack([s.embedding for s in catalog.servers])
    member_idx, densities, clusters = _select_by_clusters(
        vectors, q, cfg.top_server_clusters, cfg.gmm_cfg
    )
    ids = [catalog.servers[i].server_id for i in member_idx]
    by_id = {sid: float(d) for sid, d in zip(ids, densities)}
    return ids, by_id, clusters


def prune_tools(
    catalog: ToolCatalog,
    server_ids: Sequence[str],
    query_embedding: np.ndarray,
    cfg: PruneConfig,
    *,
    server_log_densities: Mapping[str, float] | None = None,
) -> CandidateSet:
    """Cluster each selected server's tools independently and keep the tools
    of the clusters where the query is most likely.

    `server_log_densities` carries the server-stage scores through when this
    runs as part of the full pipeline; standalone calls leave them None.
    """
    q = _check_inputs(catalog, query_embedding)
    unknown = [sid for sid in server_ids if not catalog.has_server(sid)]
    if unknown:
        raise ValueError(f"unknown server ids: {unknown}")
    if not server_ids:
        raise ValueError("server_ids must be non-empty")

    tool_candidates: list[ToolCandidate] = []
    tool_clusters: dict[str, list[int]] = {}
    ordered_servers = sorted(set(server_ids))
    for sid in ordered_servers:
        tools = catalog.tools_of(sid)
        vectors = np.stack([t.embedding for t in tools])
        member_idx, densities, clusters = _select_by_clusters(
            vectors, q, cfg.top_tool_clusters, cfg.gmm_cfg
        )
        tool_clusters[sid] = clusters
        for i, d in zip(member_idx, densities):
            tool_candidates.append(
                ToolCandidate(tool_id=tools[i].tool_id, server_id=sid, log_density=float(d))
            )

    servers = tuple(
        ServerCandidate(
            server_id=sid,
            log_density=None
            if server_log_densities is None
            else server_log_densities.get(sid),
        )
        for sid in ordered_servers
    )
    tools_sorted = tuple(
        sorted(tool_candidates, key=lambda t: (t.server_id, t.tool_id))
    )
    return CandidateSet(
        servers=servers,
        tools=tools_sorted,
        provenance={"bypassed": False, "tool_clusters": tool_clusters},
    )


def prune(
    catalog: ToolCatalog, query_embedding: np.ndarray, cfg: PruneConfig
) -> CandidateSet:
    """Full two-stage pruning; small catalogs bypass clustering entirely."""
    q = _check_inputs(catalog, query_embedding)
    if catalog.n_tools < cfg.min_catalog_for_clustering:
        servers = tuple(
            ServerCandidate(server_id=s.server_id, log_density=None)
            for s in sorted(catalog.servers, key=lambda s: s.server_id)
        )
        tools = tuple(
            ToolCandidate(tool_id=t.tool_id, server_id=t.server_id, log_density=None)
            for t in sorted(catalog.tools, key=lambda t: (t.server_id, t.tool_id))
        )
        return CandidateSet(
            servers=servers, tools=tools, provenance={"bypassed": True}
        )

    server_ids, server_density, server_clusters = _prune_servers_detailed(
        catalog, q, cfg
    )
    candidates = prune_tools(
        catalog, server_ids, q, cfg, server_log_densities=server_density
    )
    provenance = {
        "bypassed": False,
        "server_clusters": server_clusters,
        "tool_clusters": candidates.provenance["tool_clusters"],
    }
    return CandidateSet(
        servers=candidates.servers, tools=candidates.tools, provenance=provenance
    )
