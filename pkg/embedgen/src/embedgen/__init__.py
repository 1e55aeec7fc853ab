"""Offline embedding generator for the tool-selection engine's file formats."""

from .encode import (
    DEFAULT_MODEL,
    EncodeConfig,
    EncodingError,
    ModelLoadError,
    TextEncoder,
    catalog_to_doc,
    embed_catalog,
    embed_queries,
    queries_to_doc,
)
from .rawcat import (
    RawCatalog,
    RawCatalogError,
    RawParseError,
    RawQuery,
    RawReferenceError,
    RawSchemaError,
    RawServer,
    RawTool,
    load_raw_catalog,
    load_raw_queries,
)

__all__ = [
    "DEFAULT_MODEL",
    "EncodeConfig",
    "EncodingError",
    "ModelLoadError",
    "TextEncoder",
    "catalog_to_doc",
    "embed_catalog",
    "embed_queries",
    "queries_to_doc",
    "RawCatalog",
    "RawCatalogError",
    "RawParseError",
    "RawQuery",
    "RawReferenceError",
    "RawSchemaError",
    "RawServer",
    "RawTool",
    "load_raw_catalog",
    "load_raw_queries",
]
