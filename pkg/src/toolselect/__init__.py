"""Hierarchical GMM-based tool retrieval.

Prunes a server/tool catalog to a small candidate set with two-stage
Gaussian-mixture likelihood filtering, then reranks candidates against
LLM-generated ideal descriptions. Ships five comparison selectors and a
tiered exact-match benchmark harness.
"""

from .baselines import (
    BaselineKind,
    cluster_weighted_select,
    density_select,
    kmeans_select,
    mcp_zero,
    tokenization_select,
)
from .bench import (
    DEFAULT_TIERS,
    BaselineParams,
    BenchmarkReport,
    TestCase,
    TierResult,
    exact_match,
    load_cases,
    read_report,
    run_benchmark,
    save_cases,
    write_report,
)
from .catalog import (
    CatalogError,
    DanglingReferenceError,
    ParseError,
    SchemaError,
    ServerRecord,
    ToolCatalog,
    ToolRecord,
    dump_catalog,
    index_tools,
    load_catalog,
    normalize_catalog,
    subset_catalog,
)
from .clients import DictEmbedder, HttpEmbedder, MockLlmClient, OpenAiChatClient
from .gmm import (
    FitConfig,
    GaussianComponent,
    GmmFitError,
    GmmModel,
    component_count,
    component_log_density,
    fit_gmm,
    rank_components,
)
from .pruner import (
    CandidateSet,
    PruneConfig,
    ServerCandidate,
    ToolCandidate,
    prune,
    prune_servers,
    prune_tools,
)
from .rerank import (
    Embedder,
    IdealDescriptions,
    LlmClient,
    LlmTransportError,
    MissingLabelError,
    RankedPair,
    SelectionOutcome,
    build_prompt,
    final_score,
    parse_ideal,
    rank_candidates,
    run_selection,
    select,
)
from .vecmath import DimensionMismatchError, ZeroVectorError, cosine, l2_normalize

__all__ = [
    "BaselineKind",
    "BaselineParams",
    "BenchmarkReport",
    "CandidateSet",
    "CatalogError",
    "DanglingReferenceError",
    "DEFAULT_TIERS",
    "DictEmbedder",
    "DimensionMismatchError",
    "Embedder",
    "FitConfig",
    "GaussianComponent",
    "GmmFitError",
    "GmmModel",
    "HttpEmbedder",
    "IdealDescriptions",
    "LlmClient",
    "LlmTransportError",
    "MissingLabelError",
    "MockLlmClient",
    "OpenAiChatClient",
    "ParseError",
    "PruneConfig",
    "RankedPair",
    "SchemaError",
    "SelectionOutcome",
    "ServerCandidate",
    "ServerRecord",
    "TestCase",
    "TierResult",
    "ToolCandidate",
    "ToolCatalog",
    "ToolRecord",
    "ZeroVectorError",
    "build_prompt",
    "cluster_weighted_select",
    "component_count",
    "component_log_density",
    "cosine",
    "density_select",
    "dump_catalog",
    "exact_match",
    "final_score",
    "fit_gmm",
    "index_tools",
    "kmeans_select",
    "l2_normalize",
    "load_cases",
    "load_catalog",
    "mcp_zero",
    "normalize_catalog",
    "parse_ideal",
    "prune",
    "prune_servers",
    "prune_tools",
    "rank_candidates",
    "rank_components",
    "read_report",
    "run_benchmark",
    "run_selection",
    "save_cases",
    "select",
    "subset_catalog",
    "tokenization_select",
    "write_report",
]
