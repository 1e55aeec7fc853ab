"""Format contract with the retrieval engine, checked through its CLI.

These tests treat the engine as an external program: files go in, exit
codes come out. The embedding model is a locally built stand-in whose
output dimension matches the published all-MiniLM-L6-v2 value (384), so
the dimension assertion checks the same contract the reference model
would produce.
"""

import json
import shutil
import subprocess

import pytest

from embedgen.encode import embed_catalog, embed_queries


@pytest.fixture(scope="module")
def engine_cli():
    path = shutil.which("toolselect")
    if path is None:
        pytest.fail("the 'toolselect' CLI must be installed for format-contract tests")
    return path


def test_catalog_output_passes_engine_validation_at_dim_384(
    engine_cli, tiny_model_dir, raw_catalog_path, tmp_path
):
    out = tmp_path / "catalog.json"
    embed_catalog(raw_catalog_path, out, tiny_model_dir)

    doc = json.loads(out.read_text())
    assert doc["dimension"] == 384

    proc = subprocess.run(
        [engine_cli, "validate", str(out)], capture_output=True, text=True
    )
    assert proc.returncode == 0, proc.stderr
    assert "servers=3 tools=5 dim=384" in proc.stdout


def test_query_output_runs_through_engine_benchmark(
    engine_cli, tiny_model_dir, raw_catalog_path, raw_queries_path, tmp_path
):
    """Generated files drive a full engine benchmark to perfect accuracy.

    The mock LLM answers each query with the truth tool's own description
    and the embedding table is built from the generated files, so the
    engine can only score 100% if identical strings got identical vectors
    and every record kept its embedding. A catalog-side collapse (all
    texts one vector) turns the ranking into tie-breaking and fails this.
    """
    catalog_out = tmp_path / "catalog.json"
    cases_out = tmp_path / "cases.json"
    embed_catalog(raw_catalog_path, catalog_out, tiny_model_dir)
    embed_queries(raw_queries_path, cases_out, tiny_model_dir)

    catalog = json.loads(catalog_out.read_text())
    cases = json.loads(cases_out.read_text())
    table = {c["query"]: c["query_embedding"] for c in cases}
    for server in catalog["servers"]:
        table[server["description"]] = server["embedding"]
        for tool in server["tools"]:
            table[tool["description"]] = tool["embedding"]
    table_path = tmp_path / "table.json"
    table_path.write_text(json.dumps(table))
    rules_path = tmp_path / "rules.json"
    rules_path.write_text(
        json.dumps(
            {
                "rules": [
                    ["report file", "local file utilities", "read a text file"],
                    ["weather tomorrow", "weather lookups", "forecast tomorrow"],
                ]
            }
        )
    )

    report_path = tmp_path / "report.json"
    proc = subprocess.run(
        [
            engine_cli, "bench",
            "--catalog", str(catalog_out),
            "--cases", str(cases_out),
            "--method", "mcp-zero",
            "--client", f"mock:{rules_path}",
            "--embedder", f"dict:{table_path}",
            "--budget", "5",
            "--tiers", "5",
            "--seed", "0",
            "--out", str(report_path),
        ],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    report = json.loads(report_path.read_text())
    assert report["method"] == "mcp-zero"
    tier = report["tiers"][0]
    assert tier["n_cases"] == 3
    assert tier["n_failures"] == 0
    assert tier["accuracy"] == 1.0
