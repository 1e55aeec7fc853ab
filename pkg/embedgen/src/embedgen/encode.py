"""Batch-encode raw catalog/query text into the engine's JSON formats.

The sentence-embedding model is treated as an opaque text-to-vector map.
Vectors are written exactly as the model produced them (no normalization);
the engine normalizes on load, so that contract lives in one place.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .rawcat import RawCatalog, RawQuery, load_raw_catalog, load_raw_queries

DEFAULT_MODEL = "sentence-transformers/all-MiniLM-L6-v2"


class ModelLoadError(Exception):
    """The sentence-embedding model could not be constructed."""


class EncodingError(Exception):
    """A record's text could not be encoded."""


@dataclass(frozen=True)
class EncodeConfig:
    model_name: str = DEFAULT_MODEL
    batch_size: int = 32
    device: str | None = None

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


class TextEncoder:
    """Thin wrapper around a sentence-transformers model.

    Loading is deferred to construction time so callers see one error
    surface (`ModelLoadError`) whether the name is wrong, the files are
    missing, or the download is unreachable.
    """

    def __init__(self, cfg: EncodeConfig) -> None:
        try:
            from sentence_transformers import SentenceTransformer

            self._model = SentenceTransformer(cfg.model_name, device=cfg.device)
        except Exception as exc:
            raise ModelLoadError(
                f"could not load embedding model '{cfg.model_name}': {exc}"
            ) from exc
        self._batch_size = cfg.batch_size

    @property
    def dimension(self) -> int:
        # renamed upstream; keep working across sentence-transformers versions
        probe = getattr(self._model, "get_embedding_dimension", None)
        if probe is None:
            probe = self._model.get_sentence_embedding_dimension
        dim = probe()
        if dim is None:
            dim = int(self.encode(["probe"]).shape[1])
        return int(dim)

    def encode(self, texts: Sequence[str]) -> np.ndarray:
        """Encode a batch of texts into a (len(texts), d) float array."""
        if not texts:
            return np.zeros((0, self.dimension), dtype=np.float64)
        try:
            vecs = self._model.encode(
                list(texts),
                batch_size=self._batch_size,
                convert_to_numpy=True,
                show_progress_bar=False,
            )
        except Exception as exc:
            raise EncodingError(f"embedding model failed on a batch of texts: {exc}") from exc
        return np.asarray(vecs, dtype=np.float64)


def _check_text(text: str, where: str) -> str:
    if not text.strip():
        raise EncodingError(f"{where}: description text is empty")
    return text


def _vector(arr: np.ndarray) -> list[float]:
    return [float(x) for x in arr]


def catalog_to_doc(raw: RawCatalog, encoder: TextEncoder) -> dict:
    """Embed every description in `raw` and build the engine's catalog doc.

    All texts go through the model in one deterministic pass, in catalog
    order: servers first, then tools grouped by server.
    """
    texts: list[str] = []
    for server in raw.servers:
        texts.append(_check_text(server.description, f"server '{server.server_id}'"))
    for server in raw.servers:
        for tool in server.tools:
            texts.append(_check_text(tool.description, f"tool '{tool.tool_id}'"))
    vecs = encoder.encode(texts)

    server_vecs = vecs[: raw.n_servers]
    tool_vecs = vecs[raw.n_servers :]
    doc: dict = {"dimension": int(vecs.shape[1]), "servers": []}
    cursor = 0
    for server, svec in zip(raw.servers, server_vecs):
        tools = []
        for tool in server.tools:
            tools.append(
                {
                    "id": tool.tool_id,
                    "name": tool.name,
                    "description": tool.description,
                    "embedding": _vector(tool_vecs[cursor]),
                }
            )
            cursor += 1
        doc["servers"].append(
            {
                "id": server.server_id,
                "name": server.name,
                "description": server.description,
                "embedding": _vector(svec),
                "tools": tools,
            }
        )
    return doc


def queries_to_doc(queries: Sequence[RawQuery], encoder: TextEncoder) -> list[dict]:
    """Embed query strings and build the engine's test-case array."""
    texts = []
    for pos, q in enumerate(queries):
        if not q.query.strip():
            raise EncodingError(f"query {pos} (tool '{q.tool_id}') has an empty query string")
        texts.append(q.query)
    vecs = encoder.encode(texts)
    return [
        {
            "query": q.query,
            "query_embedding": _vector(vec),
            "server_id": q.server_id,
            "tool_id": q.tool_id,
        }
        for q, vec in zip(queries, vecs)
    ]


def embed_catalog(
    raw_path: str | Path,
    out_path: str | Path,
    model_name: str = DEFAULT_MODEL,
    *,
    batch_size: int = 32,
    device: str | None = None,
) -> None:
    """Read a raw catalog, embed all descriptions, write an engine catalog."""
    raw = load_raw_catalog(raw_path)
    encoder = TextEncoder(EncodeConfig(model_name=model_name, batch_size=batch_size, device=device))
    doc = catalog_to_doc(raw, encoder)
    Path(out_path).write_text(json.dumps(doc), encoding="utf-8")


def embed_queries(
    queries_path: str | Path,
    out_path: str | Path,
    model_name: str = DEFAULT_MODEL,
    *,
    batch_size: int = 32,
    device: str | None = None,
) -> None:
    """Read raw queries, embed them, write an engine test-case file."""
    queries = load_raw_queries(queries_path)
    encoder = TextEncoder(EncodeConfig(model_name=model_name, batch_size=batch_size, device=device))
    payload = queries_to_doc(queries, encoder)
    Path(out_path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
