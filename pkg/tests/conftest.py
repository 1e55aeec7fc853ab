import json

import numpy as np
import pytest

from toolselect.catalog import load_catalog, normalize_catalog
from toolselect.synthetic import make_planted_world

_ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _ACCEPTANCE_RESULTS.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _ACCEPTANCE_RESULTS:
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  {name}")


TINY_CATALOG_DOC = {
    "dimension": 4,
    "servers": [
        {
            "id": "srv-a",
            "name": "alpha",
            "description": "file utilities",
            "embedding": [3.0, 4.0, 0.0, 0.0],
            "tools": [
                {
                    "id": "t-read",
                    "name": "read",
                    "description": "read a file",
                    "embedding": [1.0, 0.0, 0.0, 0.0],
                },
                {
                    "id": "t-write",
                    "name": "write",
                    "description": "write a file",
                    "embedding": [0.0, 1.0, 0.0, 0.0],
                },
            ],
        },
        {
            "id": "srv-b",
            "name": "beta",
            "description": "weather lookups",
            "embedding": [0.0, 0.0, 1.0, 1.0],
            "tools": [
                {
                    "id": "t-forecast",
                    "name": "forecast",
                    "description": "forecast tomorrow",
                    "embedding": [0.0, 0.0, 0.0, 2.0],
                }
            ],
        },
    ],
}


@pytest.fixture
def tiny_doc():
    return json.loads(json.dumps(TINY_CATALOG_DOC))


@pytest.fixture
def tiny_catalog_path(tmp_path, tiny_doc):
    path = tmp_path / "catalog.json"
    path.write_text(json.dumps(tiny_doc))
    return path


@pytest.fixture
def tiny_catalog(tiny_catalog_path):
    return load_catalog(tiny_catalog_path)


@pytest.fixture
def tiny_normalized(tiny_catalog):
    return normalize_catalog(tiny_catalog)


@pytest.fixture(scope="session")
def small_world():
    """8 servers x 6 tools in 128 dimensions; relaxed separation bounds so
    the geometry is feasible at this dimension. 20 cases."""
    return make_planted_world(
        n_servers=8,
        tools_per_server=6,
        dimension=128,
        seed=11,
        n_cases=20,
        inter_cos_max=0.5,
        intra_cos_min=0.9,
    )


def random_catalog(rng: np.random.Generator, n_servers: int, tools_per_server, dimension: int):
    """Random unit-embedding catalog for property tests; tools_per_server is
    an int or a callable giving the count for each server index."""
    from toolselect.catalog import ServerRecord, ToolCatalog, ToolRecord

    servers = []
    tools = []
    for i in range(n_servers):
        sid = f"s{i:03d}"
        count = tools_per_server(i) if callable(tools_per_server) else tools_per_server
        tool_ids = []
        for j in range(count):
            tid = f"{sid}.t{j:03d}"
            vec = rng.standard_normal(dimension)
            tools.append(ToolRecord(tid, sid, f"tool {tid}", f"does {tid}", vec))
            tool_ids.append(tid)
        servers.append(
            ServerRecord(sid, f"server {sid}", f"hosts {sid}", rng.standard_normal(dimension), tuple(tool_ids))
        )
    raw = ToolCatalog(dimension=dimension, servers=tuple(servers), tools=tuple(tools), normalized=False)
    return normalize_catalog(raw)
