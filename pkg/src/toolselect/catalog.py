"""Load, validate, subset, and index the server/tool catalog.

Catalog JSON layout (UTF-8):

    {
      "dimension": 384,
      "servers": [
        {
          "id": "srv-1", "name": "...", "description": "...",
          "embedding": [f, ...],            # length == dimension, raw floats
          "tools": [
            {"id": "tool-1", "name": "...", "description": "...",
             "embedding": [f, ...]}
          ]
        }
      ]
    }

Embeddings are stored raw; the engine normalizes after loading. Tool
objects may carry a redundant "server_id" field, which must name the
enclosing server.

A loaded catalog is immutable: every operation here returns a new value,
so one normalized catalog can be shared freely across concurrent queries.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .vecmath import ZERO_NORM_THRESHOLD, ZeroVectorError, l2_normalize


class CatalogError(Exception):
    """Base class for catalog validation failures."""


class ParseError(CatalogError):
    """The file is not valid JSON."""


class SchemaError(CatalogError):
    """A required field is missing or has the wrong shape/type."""


class DanglingReferenceError(CatalogError):
    """A tool names a server that does not exist."""


@dataclass(frozen=True)
class ToolRecord:
    tool_id: str
    server_id: str
    name: str
    description: str
    embedding: np.ndarray


@dataclass(frozen=True)
class ServerRecord:
    server_id: str
    name: str
    description: str
    embedding: np.ndarray
    tool_ids: tuple[str, ...]


@dataclass(frozen=True)
class ToolCatalog:
    """The full server/tool hierarchy with embedding vectors.

    `normalized` is set once every embedding is unit-norm; stages that rely
    on cosine==dot (pruning, reranking) require it.
    """

    dimension: int
    servers: tuple[ServerRecord, ...]
    tools: tuple[ToolRecord, ...]
    normalized: bool = False
    _server_index: dict = field(init=False, repr=False, compare=False, default_factory=dict)
    _tool_index: dict = field(init=False, repr=False, compare=False, default_factory=dict)

    def __post_init__(self) -> None:
        self._server_index.update({s.server_id: s for s in self.servers})
        self._tool_index.update({t.tool_id: t for t in self.tools})

    @property
    def n_servers(self) -> int:
        return len(self.servers)

    @property
    def n_tools(self) -> int:
        return len(self.tools)

    def server_by_id(self, server_id: str) -> ServerRecord:
        return self._server_index[server_id]

    def tool_by_id(self, tool_id: str) -> ToolRecord:
        return self._tool_index[tool_id]

    def has_server(self, server_id: str) -> bool:
        return server_id in self._server_index

    def has_tool(self, tool_id: str) -> bool:
        return tool_id in self._tool_index

    def tools_of(self, server_id: str) -> tuple[ToolRecord, ...]:
        server = self.server_by_id(server_id)
        return tuple(self._tool_index[tid] for tid in server.tool_ids)


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise SchemaError(f"{where}: missing field '{key}'")
    return obj[key]


def _parse_embedding(raw, dimension: int, where: str) -> np.ndarray:
    if not isinstance(raw, (list, tuple)):
        raise SchemaError(f"{where}: embedding must be a list of numbers")
    arr = np.asarray(raw, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != dimension:
        raise SchemaError(
            f"{where}: embedding has length {arr.shape[0] if arr.ndim == 1 else '?'}, expected {dimension}"
        )
    if not np.all(np.isfinite(arr)):
        raise SchemaError(f"{where}: embedding contains non-finite entries")
    return arr


def load_catalog(path: str | Path) -> ToolCatalog:
    """Parse and validate a catalog JSON file.

    The returned catalog has `normalized=False`; callers that need
    cosine==dot must run `normalize_catalog` next.
    """
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON: {exc}") from exc

    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: top level must be an object")
    dimension = _require(doc, "dimension", str(path))
    if not isinstance(dimension, int) or dimension < 1:
        raise SchemaError(f"{path}: 'dimension' must be a positive integer")
    raw_servers = _require(doc, "servers", str(path))
    if not isinstance(raw_servers, list) or not raw_servers:
        raise SchemaError(f"{path}: 'servers' must be a non-empty list")

    server_ids = {str(s.get("id")) for s in raw_servers if isinstance(s, dict)}
    servers: list[ServerRecord] = []
    tools: list[ToolRecord] = []
    seen_servers: set[str] = set()
    seen_tools: set[str] = set()

    for raw_server in raw_servers:
        if not isinstance(raw_server, dict):
            raise SchemaError(f"{path}: each server must be an object")
        sid = str(_require(raw_server, "id", "server"))
        where = f"server '{sid}'"
        if sid in seen_servers:
            raise SchemaError(f"{where}: duplicate server id")
        seen_servers.add(sid)
        name = str(_require(raw_server, "name", where))
        description = str(_require(raw_server, "description", where))
        embedding = _parse_embedding(_require(raw_server, "embedding", where), dimension, where)
        raw_tools = _require(raw_server, "tools", where)
        if not isinstance(raw_tools, list) or not raw_tools:
            raise SchemaError(f"{where}: 'tools' must be a non-empty list")

        tool_ids: list[str] = []
        for raw_tool in raw_tools:
            if not isinstance(raw_tool, dict):
                raise SchemaError(f"{where}: each tool must be an object")
            tid = str(_require(raw_tool, "id", f"{where} tool"))
            twhere = f"tool '{tid}'"
            if tid in seen_tools:
                raise SchemaError(f"{twhere}: duplicate tool id")
            seen_tools.add(tid)
            owner = raw_tool.get("server_id", sid)
            if owner != sid:
                if str(owner) not in server_ids:
                    raise DanglingReferenceError(
                        f"{twhere}: references unknown server '{owner}'"
                    )
                raise DanglingReferenceError(
                    f"{twhere}: references server '{owner}' but is declared under '{sid}'"
                )
            tools.append(
                ToolRecord(
                    tool_id=tid,
                    server_id=sid,
                    name=str(_require(raw_tool, "name", twhere)),
                    description=str(_require(raw_tool, "description", twhere)),
                    embedding=_parse_embedding(
                        _require(raw_tool, "embedding", twhere), dimension, twhere
                    ),
                )
            )
            tool_ids.append(tid)
        servers.append(
            ServerRecord(
                server_id=sid,
                name=name,
                description=description,
                embedding=embedding,
                tool_ids=tuple(tool_ids),
            )
        )

    return ToolCatalog(
        dimension=dimension,
        servers=tuple(servers),
        tools=tuple(tools),
        normalized=False,
    )


def dump_catalog(catalog: ToolCatalog, path: str | Path) -> None:
    """Write a catalog back to the JSON layout accepted by load_catalog."""
    doc = {
        "dimension": catalog.dimension,
        "servers": [
            {
                "id": server.server_id,
                "name": server.name,
                "description": server.description,
                "embedding": [float(x) for x in server.embedding],
                "tools": [
                    {
                        "id": tool.tool_id,
                        "name": tool.name,
                        "description": tool.description,
                        "embedding": [float(x) for x in tool.embedding],
                    }
                    for tool in catalog.tools_of(server.server_id)
                ],
            }
            for server in catalog.servers
        ],
    }
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def normalize_catalog(catalog: ToolCatalog) -> ToolCatalog:
    """Return a copy with every embedding scaled to unit norm.

    Idempotent within float error. Raises ZeroVectorError naming the first
    record whose embedding norm falls below the zero threshold.
    """

    def _norm(vec: np.ndarray, where: str) -> np.ndarray:
        if float(np.linalg.norm(vec)) <= ZERO_NORM_THRESHOLD:
            raise ZeroVectorError(f"{where}: embedding has (near-)zero norm")
        return l2_normalize(vec)

    servers = tuple(
        ServerRecord(
            server_id=s.server_id,
            name=s.name,
            description=s.description,
            embedding=_norm(s.embedding, f"server '{s.server_id}'"),
            tool_ids=s.tool_ids,
        )
        for s in catalog.servers
    )
    tools = tuple(
        ToolRecord(
            tool_id=t.tool_id,
            server_id=t.server_id,
            name=t.name,
            description=t.description,
            embedding=_norm(t.embedding, f"tool '{t.tool_id}'"),
        )
        for t in catalog.tools
    )
    return ToolCatalog(
        dimension=catalog.dimension, servers=servers, tools=tools, normalized=True
    )


def subset_catalog(
    catalog: ToolCatalog,
    sample_size: int,
    seed: int,
    force_include: Sequence[str] = (),
) -> ToolCatalog:
    """Sample `sample_size` tools uniformly without replacement.

    `force_include` lists tool ids that must survive (the benchmark forces
    each test case's ground truth in, so exact-match accuracy stays
    well-defined at every sample size). The result keeps only the servers
    owning surviving tools; a pure function of (catalog, sample_size, seed,
    force_include).
    """
    if not 1 <= sample_size <= catalog.n_tools:
        raise ValueError(
            f"sample_size must be in [1, {catalog.n_tools}], got {sample_size}"
        )
    forced: list[str] = []
    for tid in force_include:
        if not catalog.has_tool(tid):
            raise ValueError(f"force_include names unknown tool '{tid}'")
        if tid not in forced:
            forced.append(tid)
    if len(forced) > sample_size:
        raise ValueError(
            f"cannot force {len(forced)} tools into a sample of {sample_size}"
        )

    forced_set = set(forced)
    pool = [t.tool_id for t in catalog.tools if t.tool_id not in forced_set]
    n_extra = sample_size - len(forced)
    rng = np.random.default_rng(seed)
    extra_idx = rng.choice(len(pool), size=n_extra, replace=False) if n_extra else []
    keep = forced_set | {pool[i] for i in extra_idx}

    tools = tuple(t for t in catalog.tools if t.tool_id in keep)
    servers = tuple(
        ServerRecord(
            server_id=s.server_id,
            name=s.name,
            description=s.description,
            embedding=s.embedding,
            tool_ids=tuple(tid for tid in s.tool_ids if tid in keep),
        )
        for s in catalog.servers
        if any(tid in keep for tid in s.tool_ids)
    )
    return ToolCatalog(
        dimension=catalog.dimension,
        servers=servers,
        tools=tools,
        normalized=catalog.normalized,
    )


def index_tools(catalog: ToolCatalog, cap: int) -> ToolCatalog:
    """Retain at most `cap` tools per server, in each server's declared order.

    Declared order is reproducible and blind to any query, which keeps the
    cap from biasing retrieval. A cap at or above every server's tool count
    is a no-op.
    """
    if cap < 1:
        raise ValueError(f"cap must be >= 1, got {cap}")
    keep: set[str] = set()
    servers = []
    for s in catalog.servers:
        kept_ids = s.tool_ids[:cap]
        keep.update(kept_ids)
        servers.append(
            ServerRecord(
                server_id=s.server_id,
                name=s.name,
                description=s.description,
                embedding=s.embedding,
                tool_ids=kept_ids,
            )
        )
    tools = tuple(t for t in catalog.tools if t.tool_id in keep)
    return ToolCatalog(
        dimension=catalog.dimension,
        servers=tuple(servers),
        tools=tools,
        normalized=catalog.normalized,
    )
