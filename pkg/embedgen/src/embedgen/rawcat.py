"""Parse and validate embedding-free catalog and query files.

Raw catalog JSON layout (UTF-8) — the engine's catalog format minus the
"dimension" field and the per-record "embedding" arrays:

    {
      "servers": [
        {
          "id": "srv-1", "name": "...", "description": "...",
          "tools": [
            {"id": "tool-1", "name": "...", "description": "..."}
          ]
        }
      ]
    }

Tool objects may carry a redundant "server_id" field, which must name the
enclosing server. Identifier rules match the engine's loader: ids unique,
the server list non-empty, every server owning at least one tool.

Raw query JSON layout: an array of objects with keys "query", "server_id"
and "tool_id" — the engine's test-case format minus "query_embedding".
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


class RawCatalogError(Exception):
    """Base class for raw-file validation failures."""


class RawParseError(RawCatalogError):
    """The file is not valid JSON."""


class RawSchemaError(RawCatalogError):
    """A required field is missing or has the wrong shape/type."""


class RawReferenceError(RawCatalogError):
    """A tool names a server other than the one it is declared under."""


@dataclass(frozen=True)
class RawTool:
    tool_id: str
    server_id: str
    name: str
    description: str


@dataclass(frozen=True)
class RawServer:
    server_id: str
    name: str
    description: str
    tools: tuple[RawTool, ...]


@dataclass(frozen=True)
class RawCatalog:
    servers: tuple[RawServer, ...]

    @property
    def n_servers(self) -> int:
        return len(self.servers)

    @property
    def n_tools(self) -> int:
        return sum(len(s.tools) for s in self.servers)


@dataclass(frozen=True)
class RawQuery:
    query: str
    server_id: str
    tool_id: str


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise RawSchemaError(f"{where}: missing field '{key}'")
    return obj[key]


def _load_json(path: Path):
    try:
        with path.open("r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise RawParseError(f"{path}: not valid JSON: {exc}") from exc


def load_raw_catalog(path: str | Path) -> RawCatalog:
    """Parse and validate a raw (embedding-free) catalog file."""
    path = Path(path)
    doc = _load_json(path)
    if not isinstance(doc, dict):
        raise RawSchemaError(f"{path}: top level must be an object")
    raw_servers = _require(doc, "servers", str(path))
    if not isinstance(raw_servers, list) or not raw_servers:
        raise RawSchemaError(f"{path}: 'servers' must be a non-empty list")

    servers: list[RawServer] = []
    seen_servers: set[str] = set()
    seen_tools: set[str] = set()
    for raw_server in raw_servers:
        if not isinstance(raw_server, dict):
            raise RawSchemaError(f"{path}: each server must be an object")
        sid = str(_require(raw_server, "id", "server"))
        where = f"server '{sid}'"
        if sid in seen_servers:
            raise RawSchemaError(f"{where}: duplicate server id")
        seen_servers.add(sid)
        name = str(_require(raw_server, "name", where))
        description = str(_require(raw_server, "description", where))
        raw_tools = _require(raw_server, "tools", where)
        if not isinstance(raw_tools, list) or not raw_tools:
            raise RawSchemaError(f"{where}: 'tools' must be a non-empty list")

        tools: list[RawTool] = []
        for raw_tool in raw_tools:
            if not isinstance(raw_tool, dict):
                raise RawSchemaError(f"{where}: each tool must be an object")
            tid = str(_require(raw_tool, "id", f"{where} tool"))
            twhere = f"tool '{tid}'"
            if tid in seen_tools:
                raise RawSchemaError(f"{twhere}: duplicate tool id")
            seen_tools.add(tid)
            owner = str(raw_tool.get("server_id", sid))
            if owner != sid:
                raise RawReferenceError(
                    f"{twhere}: references server '{owner}' but is declared under '{sid}'"
                )
            tools.append(
                RawTool(
                    tool_id=tid,
                    server_id=sid,
                    name=str(_require(raw_tool, "name", twhere)),
                    description=str(_require(raw_tool, "description", twhere)),
                )
            )
        servers.append(
            RawServer(server_id=sid, name=name, description=description, tools=tuple(tools))
        )
    return RawCatalog(servers=tuple(servers))


def load_raw_queries(path: str | Path) -> list[RawQuery]:
    """Parse a query file: a JSON array of {query, server_id, tool_id}."""
    path = Path(path)
    data = _load_json(path)
    if not isinstance(data, list):
        raise RawSchemaError(f"{path}: query file must be a JSON array")
    queries: list[RawQuery] = []
    for pos, entry in enumerate(data):
        where = f"query {pos}"
        if not isinstance(entry, dict):
            raise RawSchemaError(f"{where}: each entry must be an object")
        queries.append(
            RawQuery(
                query=str(_require(entry, "query", where)),
                server_id=str(_require(entry, "server_id", where)),
                tool_id=str(_require(entry, "tool_id", where)),
            )
        )
    return queries
