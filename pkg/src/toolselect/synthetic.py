"""Planted-ground-truth worlds for offline evaluation.

A planted world is a catalog whose embeddings form well-separated blobs
(one blob per server, tools scattered tightly around each center), plus
queries that sit inside a known tool's blob. Because the geometry is
planted, the correct answer for every query is known exactly, which turns
end-to-end selection into something with a checkable oracle.

The world also carries everything needed to run without network access: a
text -> vector table for a DictEmbedder and rule tables for the mock chat
clients below.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .bench import TestCase, save_cases
from .catalog import (
    ServerRecord,
    ToolCatalog,
    ToolRecord,
    dump_catalog,
    normalize_catalog,
)
from .clients import DictEmbedder, MockLlmClient, format_ideal_completion
from .vecmath import l2_normalize

DEFAULT_GATED_FALLBACK = ("an unrelated bookkeeping server", "an unrelated bookkeeping tool")


class CandidateGatedMockClient:
    """Mock chat model that can only confirm what it is shown.

    For a recognized query it echoes the ground-truth descriptions when the
    truth tool appears among the prompt's candidates, and answers with an
    unrelated default pair otherwise. This models a "perfect but honest"
    LLM: selection then succeeds exactly when the pruning stage kept the
    truth, isolating candidate recall as the measured quantity.
    """

    def __init__(
        self,
        rules: Sequence[tuple[str, str, str, str]],
        default: tuple[str, str] = DEFAULT_GATED_FALLBACK,
    ):
        # (query text, truth tool id, server description, tool description)
        self.rules = list(rules)
        self.default = default
        self.calls = 0

    def complete(self, system: str, user: str) -> str:
        self.calls += 1
        for query_text, tool_id, server_text, tool_text in self.rules:
            if query_text in user:
                if f"[tool {tool_id}]" in user:
                    return format_ideal_completion(server_text, tool_text)
                break
        return format_ideal_completion(*self.default)

    @classmethod
    def from_json(cls, path: str | Path) -> "CandidateGatedMockClient":
        spec = json.loads(Path(path).read_text())
        rules = [tuple(r) for r in spec.get("rules", [])]
        default = tuple(spec.get("default", DEFAULT_GATED_FALLBACK))
        return cls(rules=rules, default=default)


@dataclass(frozen=True)
class PlantedWorld:
    """A synthetic catalog with known-correct answers and offline fixtures."""

    catalog: ToolCatalog
    cases: tuple[TestCase, ...]
    embedding_table: dict[str, np.ndarray]
    echo_rules: tuple[tuple[str, str, str], ...]
    gated_rules: tuple[tuple[str, str, str, str], ...]

    def embedder(self) -> DictEmbedder:
        return DictEmbedder(self.embedding_table)

    def echo_client(self) -> MockLlmClient:
        """Always answers with the ground-truth descriptions."""
        return MockLlmClient(rules=self.echo_rules)

    def gated_client(self) -> CandidateGatedMockClient:
        """Answers with the truth only when it appears in the prompt."""
        return CandidateGatedMockClient(rules=self.gated_rules)


def _sample_centers(
    rng: np.random.Generator, n: int, dimension: int, inter_cos_max: float
) -> np.ndarray:
    for _ in range(64):
        centers = rng.standard_normal((n, dimension))
        centers /= np.linalg.norm(centers, axis=1, keepdims=True)
        gram = centers @ centers.T
        np.fill_diagonal(gram, 0.0)
        if n == 1 or float(np.abs(gram).max()) < inter_cos_max:
            return centers
    raise RuntimeError(
        f"could not place {n} centers with pairwise |cos| < {inter_cos_max} "
        f"in dimension {dimension}; raise the dimension or the bound"
    )


def _perturb(rng: np.random.Generator, base: np.ndarray, radius: float) -> np.ndarray:
    """Gaussian bump with expected norm ~radius regardless of dimension.

    The 1/sqrt(d) factor keeps cos(base, base+bump) near 1/(1+radius^2)
    at every d; an unscaled bump would have norm radius*sqrt(d) and wash
    the blob structure out in high dimension.
    """
    d = base.shape[-1]
    return base + (radius / np.sqrt(d)) * rng.standard_normal(base.shape)


def _sample_blob(
    rng: np.random.Generator,
    center: np.ndarray,
    n: int,
    radius: float,
    intra_cos_min: float,
) -> np.ndarray:
    for _ in range(64):
        pts = _perturb(rng, np.broadcast_to(center, (n, center.shape[0])), radius)
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        gram = pts @ pts.T
        if n == 1 or float(gram.min()) > intra_cos_min:
            return pts
    raise RuntimeError(
        f"could not sample a blob of {n} points with pairwise cos > {intra_cos_min} "
        f"at radius {radius}; shrink the radius"
    )


def make_planted_world(
    n_servers: int = 16,
    tools_per_server: int = 8,
    dimension: int = 384,
    seed: int = 0,
    n_cases: int = 50,
    tool_radius: float = 0.12,
    query_radius: float = 0.05,
    inter_cos_max: float = 0.3,
    intra_cos_min: float = 0.95,
) -> PlantedWorld:
    """Build a separated-blob catalog and queries with known answers.

    Geometry guarantees (enforced by rejection sampling, error if
    unsatisfiable): pairwise cosine between server centers stays below
    inter_cos_max, and pairwise cosine between same-server tools stays
    above intra_cos_min. Case i targets tool i mod N, so any n_cases covers
    the catalog roughly uniformly. Fully deterministic per seed.
    """
    if n_servers < 1 or tools_per_server < 1 or n_cases < 1:
        raise ValueError("n_servers, tools_per_server, n_cases must be >= 1")
    rng = np.random.default_rng(seed)
    centers = _sample_centers(rng, n_servers, dimension, inter_cos_max)

    servers = []
    tools = []
    table: dict[str, np.ndarray] = {}
    echo_rules = []
    gated_rules = []
    for i in range(n_servers):
        sid = f"s{i:02d}"
        server_desc = f"planted server {sid} hosting blob {i} utilities"
        blob = _sample_blob(rng, centers[i], tools_per_server, tool_radius, intra_cos_min)
        tool_ids = []
        for j in range(tools_per_server):
            tid = f"{sid}_t{j:02d}"
            tool_desc = f"planted tool {tid} performing blob {i} task {j}"
            tools.append(
                ToolRecord(
                    tool_id=tid,
                    server_id=sid,
                    name=f"tool {tid}",
                    description=tool_desc,
                    embedding=blob[j],
                )
            )
            table[tool_desc] = blob[j]
            tool_ids.append(tid)
        servers.append(
            ServerRecord(
                server_id=sid,
                name=f"server {sid}",
                description=server_desc,
                embedding=centers[i],
                tool_ids=tuple(tool_ids),
            )
        )
        table[server_desc] = centers[i]

    catalog = normalize_catalog(
        ToolCatalog(
            dimension=dimension,
            servers=tuple(servers),
            tools=tuple(tools),
            normalized=False,
        )
    )

    cases = []
    for c in range(n_cases):
        tool = tools[c % len(tools)]
        server = catalog.server_by_id(tool.server_id)
        q = l2_normalize(_perturb(rng, tool.embedding, query_radius))
        query_text = f"q{c:04d} locate the planted tool {tool.tool_id}"
        cases.append(
            TestCase(
                query=query_text,
                query_embedding=q,
                truth_server_id=tool.server_id,
                truth_tool_id=tool.tool_id,
            )
        )
        table[query_text] = q
        echo_rules.append((query_text, server.description, tool.description))
        gated_rules.append(
            (query_text, tool.tool_id, server.description, tool.description)
        )

    # The gated client's fallback texts need embeddings too; park them on a
    # fresh random direction far from every blob.
    for text in DEFAULT_GATED_FALLBACK:
        table[text] = l2_normalize(rng.standard_normal(dimension))

    return PlantedWorld(
        catalog=catalog,
        cases=tuple(cases),
        embedding_table=table,
        echo_rules=tuple(echo_rules),
        gated_rules=tuple(gated_rules),
    )


def write_world(world: PlantedWorld, directory: str | Path) -> dict[str, Path]:
    """Write the world as files the CLI can consume offline.

    Returns the path of each artifact: catalog.json, cases.json,
    embeddings.json (DictEmbedder table), mock_rules.json (echo client),
    gated_rules.json (candidate-gated client).
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {
        "catalog": directory / "catalog.json",
        "cases": directory / "cases.json",
        "embeddings": directory / "embeddings.json",
        "mock_rules": directory / "mock_rules.json",
        "gated_rules": directory / "gated_rules.json",
    }
    dump_catalog(world.catalog, paths["catalog"])
    save_cases(world.cases, paths["cases"])
    paths["embeddings"].write_text(
        json.dumps(
            {text: [float(x) for x in vec] for text, vec in world.embedding_table.items()}
        )
    )
    paths["mock_rules"].write_text(
        json.dumps({"rules": [list(r) for r in world.echo_rules]})
    )
    paths["gated_rules"].write_text(
        json.dumps(
            {
                "rules": [list(r) for r in world.gated_rules],
                "default": list(DEFAULT_GATED_FALLBACK),
            }
        )
    )
    return paths
