"""Final selection stage: ask an LLM to describe the ideal server and tool
for the query, embed those descriptions, and score every candidate pair.

The pair score is (server_sim * tool_sim) * max(server_sim, tool_sim):
pairs where both sides match score well, and an exceptionally strong match
on either side is rewarded beyond the plain product.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

from .catalog import ToolCatalog
from .pruner import CandidateSet, PruneConfig, prune
from .vecmath import l2_normalize

SERVER_LABEL = "SERVER_DESCRIPTION"
TOOL_LABEL = "TOOL_DESCRIPTION"

_SYSTEM_PROMPT = (
    "You are a helpful assistant that routes user requests to external tools. "
    "Given a user query and a catalog of candidate servers and tools, you "
    "describe the ideal server and the ideal tool for the request. Respond "
    f"with exactly two lines, one starting with '{SERVER_LABEL}:' and one "
    f"starting with '{TOOL_LABEL}:'."
)


@runtime_checkable
class LlmClient(Protocol):
    """Chat completion provider: (system prompt, user prompt) -> text."""

    def complete(self, system: str, user: str) -> str: ...


@runtime_checkable
class Embedder(Protocol):
    """Text embedding provider; the engine never embeds text itself."""

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]: ...


class MissingLabelError(ValueError):
    """A completion lacked one of the two required labeled lines."""

    def __init__(self, label: str):
        super().__init__(f"completion is missing a '{label}:' line")
        self.label = label


class LlmTransportError(RuntimeError):
    """The LLM call failed; the pruned candidates are preserved for callers."""

    def __init__(self, message: str, candidates: CandidateSet):
        super().__init__(message)
        self.candidates = candidates


@dataclass(frozen=True)
class IdealDescriptions:
    """LLM-generated target descriptions with their unit-norm embeddings."""

    server_text: str
    tool_text: str
    server_embedding: np.ndarray
    tool_embedding: np.ndarray


@dataclass(frozen=True)
class RankedPair:
    server_id: str
    tool_id: str
    server_score: float
    tool_score: float
    final_score: float


@dataclass(frozen=True)
class SelectionOutcome:
    """Full trace of one selection, with stage timings in milliseconds.

    llm_ms covers external round trips (chat and embedding calls);
    prune_ms and rerank_ms are local compute only.
    """

    best: RankedPair
    ranked: tuple[RankedPair, ...]
    candidates: CandidateSet
    prune_ms: float
    rerank_ms: float
    llm_ms: float
    used_fallback: bool


def build_prompt(
    query: str, candidates: CandidateSet, catalog: ToolCatalog
) -> tuple[str, str]:
    """Render the candidate set into (system prompt, user prompt).

    Candidates are listed in (server_id, tool_id) order so the prompt is
    identical across runs for the same candidate set.
    """
    if not candidates.tools:
        raise ValueError("candidate set has no tools")
    by_server: dict[str, list[str]] = {}
    for t in sorted(candidates.tools, key=lambda t: (t.server_id, t.tool_id)):
        by_server.setdefault(t.server_id, []).append(t.tool_id)

    lines = ["User query:", query, "", "Candidate servers and tools:"]
    for sid in sorted(by_server):
        server = catalog.server_by_id(sid)
        lines.append(f"[server {sid}] {server.name}: {server.description}")
        for tid in by_server[sid]:
            tool = catalog.tool_by_id(tid)
            lines.append(f"  - [tool {tid}] {tool.name}: {tool.description}")
    lines += [
        "",
        "Describe the ideal server and the ideal tool for this query.",
        "Answer with exactly two lines:",
        f"{SERVER_LABEL}: <one-line description of the ideal server>",
        f"{TOOL_LABEL}: <one-line description of the ideal tool>",
    ]
    return _SYSTEM_PROMPT, "\n".join(lines)


def _extract_label(text: str, label: str) -> str | None:
    # whitespace stays horizontal so an empty value never slurps the next
    # labeled line as its description
    match = re.search(rf"{label}\**[^\S\n]*:[^\S\n]*(.+)", text)
    if match is None:
        return None
    value = match.group(1).strip().strip("*`").strip()
    return value or None


def parse_ideal(completion: str) -> tuple[str, str]:
    """Pull the two labeled descriptions out of a completion.

    Tolerates surrounding prose and markdown fences; raises
    MissingLabelError naming whichever label is absent.
    """
    cleaned = "\n".join(
        line for line in completion.splitlines() if not line.strip().startswith("```")
    )
    server_text = _extract_label(cleaned, SERVER_LABEL)
    tool_text = _extract_label(cleaned, TOOL_LABEL)
    if server_text is None:
        raise MissingLabelError(SERVER_LABEL)
    if tool_text is None:
        raise MissingLabelError(TOOL_LABEL)
    return server_text, tool_text


def final_score(server_score: float, tool_score: float) -> float:
    """Combined pair score: product of both similarities, boosted by the
    larger of the two. Symmetric and monotone in each argument on [0, 1]."""
    return (server_score * tool_score) * max(server_score, tool_score)


def _rank_with_vectors(
    candidates: CandidateSet,
    server_vec: np.ndarray,
    tool_vec: np.ndarray,
    catalog: ToolCatalog,
) -> list[RankedPair]:
    if not candidates.tools:
        raise ValueError("cannot rank an empty candidate set")
    if not catalog.normalized:
        raise ValueError("ranking requires a normalized catalog")
    server_scores = {
        s.server_id: float(np.dot(server_vec, catalog.server_by_id(s.server_id).embedding))
        for s in candidates.servers
    }
    pairs = []
    for t in candidates.tools:
        s_score = server_scores[t.server_id]
        t_score = float(np.dot(tool_vec, catalog.tool_by_id(t.tool_id).embedding))
        pairs.append(
            RankedPair(
                server_id=t.server_id,
                tool_id=t.tool_id,
                server_score=s_score,
                tool_score=t_score,
                final_score=final_score(s_score, t_score),
            )
        )
    pairs.sort(key=lambda p: (-p.final_score, p.server_id, p.tool_id))
    return pairs


def rank_candidates(
    candidates: CandidateSet, ideal: IdealDescriptions, catalog: ToolCatalog
) -> list[RankedPair]:
    """Score every candidate (server, tool-of-that-server) pair against the
    ideal descriptions; descending score, ties by (server_id, tool_id)."""
    return _rank_with_vectors(
        candidates, ideal.server_embedding, ideal.tool_embedding, catalog
    )


def run_selection(
    query: str,
    catalog: ToolCatalog,
    cfg: PruneConfig,
    client: LlmClient,
    embedder: Embedder,
    query_embedding: np.ndarray | None = None,
    candidates: CandidateSet | None = None,
) -> SelectionOutcome:
    """Full pipeline with a timing/fallback trace.

    Pass `candidates` to skip pruning and rerank a precomputed set (the
    benchmark uses this to time baseline selectors under the same rerank).
    After one failed parse the client is retried once; a second failure
    falls back to ranking with the raw query embedding on both sides, which
    degrades to plain semantic search instead of failing the request.
    """
    llm_ms = 0.0
    if query_embedding is None:
        t0 = time.perf_counter()
        query_embedding = embedder.embed([query])[0]
        llm_ms += (time.perf_counter() - t0) * 1e3
    qv = l2_normalize(query_embedding)

    prune_ms = 0.0
    if candidates is None:
        t0 = time.perf_counter()
        candidates = prune(catalog, qv, cfg)
        prune_ms = (time.perf_counter() - t0) * 1e3

    t0 = time.perf_counter()
    system, user = build_prompt(query, candidates, catalog)
    rerank_ms = (time.perf_counter() - t0) * 1e3

    ideal_texts: tuple[str, str] | None = None
    for _ in range(2):
        t0 = time.perf_counter()
        try:
            completion = client.complete(system, user)
        except Exception as exc:
            raise LlmTransportError(f"LLM call failed: {exc}", candidates) from exc
        finally:
            llm_ms += (time.perf_counter() - t0) * 1e3
        try:
            ideal_texts = parse_ideal(completion)
            break
        except MissingLabelError:
            continue

    used_fallback = ideal_texts is None
    if used_fallback:
        server_vec = tool_vec = qv
    else:
        t0 = time.perf_counter()
        vecs = embedder.embed(list(ideal_texts))
        llm_ms += (time.perf_counter() - t0) * 1e3
        server_vec = l2_normalize(vecs[0])
        tool_vec = l2_normalize(vecs[1])

    t0 = time.perf_counter()
    ranked = _rank_with_vectors(candidates, server_vec, tool_vec, catalog)
    rerank_ms += (time.perf_counter() - t0) * 1e3

    return SelectionOutcome(
        best=ranked[0],
        ranked=tuple(ranked),
        candidates=candidates,
        prune_ms=prune_ms,
        rerank_ms=rerank_ms,
        llm_ms=llm_ms,
        used_fallback=used_fallback,
    )


def select(
    query: str,
    catalog: ToolCatalog,
    cfg: PruneConfig,
    client: LlmClient,
    embedder: Embedder,
    query_embedding: np.ndarray | None = None,
) -> RankedPair:
    """Embed the query, prune, ask for ideal descriptions, rank, and return
    the single best (server, tool) pair."""
    return run_selection(
        query, catalog, cfg, client, embedder, query_embedding=query_embedding
    ).best
