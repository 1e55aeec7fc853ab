import json

import numpy as np
import pytest
from click.testing import CliRunner

from toolselect.bench import save_cases
from toolselect.catalog import load_catalog, normalize_catalog
from toolselect.cli import main
from toolselect.gmm import FitConfig
from toolselect.pruner import PruneConfig, prune
from toolselect.synthetic import write_world
from toolselect.vecmath import l2_normalize


@pytest.fixture(scope="module")
def world_files(tmp_path_factory):
    """The small planted world written to disk, plus a 4-case file and a
    query-embedding file for CLI runs."""
    from toolselect.synthetic import make_planted_world

    world = make_planted_world(
        n_servers=8,
        tools_per_server=6,
        dimension=128,
        seed=11,
        n_cases=20,
        inter_cos_max=0.5,
        intra_cos_min=0.9,
    )
    root = tmp_path_factory.mktemp("world")
    paths = write_world(world, root)
    small_cases = root / "cases_small.json"
    save_cases(world.cases[:4], small_cases)
    qvec = root / "query0.json"
    qvec.write_text(json.dumps([float(x) for x in world.cases[0].query_embedding]))
    return {"world": world, "paths": paths, "small_cases": small_cases, "qvec": qvec}


@pytest.fixture
def runner():
    return CliRunner()


def test_validate_prints_summary(runner, tiny_catalog_path):
    result = runner.invoke(main, ["validate", str(tiny_catalog_path)])
    assert result.exit_code == 0
    assert "servers=2 tools=3 dim=4" in result.output


def test_validate_dangling_reference_fails(runner, tmp_path, tiny_doc):
    tiny_doc["servers"][0]["tools"][0]["server_id"] = "srv-x"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(tiny_doc))
    result = runner.invoke(main, ["validate", str(path)])
    assert result.exit_code == 1
    assert "t-read" in result.output
    assert "srv-x" in result.output


def test_validate_rejects_malformed_json(runner, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{nope")
    result = runner.invoke(main, ["validate", str(path)])
    assert result.exit_code == 1
    assert "not valid JSON" in result.output


def test_validate_missing_file_is_usage_error(runner):
    result = runner.invoke(main, ["validate", "/no/such/file.json"])
    assert result.exit_code == 2


def test_prune_requires_some_query(runner, world_files):
    catalog = str(world_files["paths"]["catalog"])
    result = runner.invoke(main, ["prune", "--catalog", catalog])
    assert result.exit_code == 2
    assert "provide --query or --query-embedding" in result.output

    result = runner.invoke(main, ["prune", "--catalog", catalog, "--query", "hi"])
    assert result.exit_code == 2
    assert "requires --embedder" in result.output


def test_prune_saturation_returns_whole_catalog(runner, world_files):
    result = runner.invoke(
        main,
        [
            "prune",
            "--catalog", str(world_files["paths"]["catalog"]),
            "--query-embedding", str(world_files["qvec"]),
            "--ns", "999",
            "--nt", "999",
        ],
    )
    assert result.exit_code == 0
    payload = json.loads(result.output)
    assert len(payload["tools"]) == 48
    assert payload["provenance"]["bypassed"] is False


def test_prune_matches_library_call(runner, world_files, tmp_path):
    out = tmp_path / "candidates.json"
    result = runner.invoke(
        main,
        [
            "prune",
            "--catalog", str(world_files["paths"]["catalog"]),
            "--query-embedding", str(world_files["qvec"]),
            "--ns", "1",
            "--nt", "1",
            "--seed", "3",
            "--out", str(out),
        ],
    )
    assert result.exit_code == 0, result.output
    assert "wrote" in result.output
    got = json.loads(out.read_text())

    catalog = normalize_catalog(load_catalog(world_files["paths"]["catalog"]))
    q = l2_normalize(world_files["world"].cases[0].query_embedding)
    cfg = PruneConfig(
        top_server_clusters=1, top_tool_clusters=1, gmm_cfg=FitConfig(seed=3)
    )
    expected = json.loads(json.dumps(prune(catalog, q, cfg).to_dict(), sort_keys=True))
    assert got == expected


def test_prune_tool_cap_limits_per_server(runner, world_files):
    result = runner.invoke(
        main,
        [
            "prune",
            "--catalog", str(world_files["paths"]["catalog"]),
            "--query-embedding", str(world_files["qvec"]),
            "--tool-cap", "2",
            "--ns", "999",
            "--nt", "999",
        ],
    )
    assert result.exit_code == 0
    payload = json.loads(result.output)
    assert len(payload["tools"]) == 16  # 8 servers x first 2 declared tools
    kept = {t["tool_id"] for t in payload["tools"]}
    assert "s00_t00" in kept and "s00_t01" in kept and "s00_t02" not in kept


def test_select_finds_truth_with_mock_stack(runner, world_files):
    world = world_files["world"]
    case = world.cases[0]
    result = runner.invoke(
        main,
        [
            "select",
            "--catalog", str(world_files["paths"]["catalog"]),
            "--query", case.query,
            "--client", f"mock:{world_files['paths']['mock_rules']}",
            "--embedder", f"dict:{world_files['paths']['embeddings']}",
        ],
    )
    assert result.exit_code == 0, result.output
    payload = json.loads(result.output)
    assert payload["best"]["server_id"] == case.truth_server_id
    assert payload["best"]["tool_id"] == case.truth_tool_id
    assert payload["used_fallback"] is False
    assert payload["n_candidates"] >= 1


def test_select_rejects_bad_provider_specs(runner, world_files):
    args = [
        "select",
        "--catalog", str(world_files["paths"]["catalog"]),
        "--query", "x",
        "--embedder", f"dict:{world_files['paths']['embeddings']}",
    ]
    result = runner.invoke(main, args + ["--client", "carrier-pigeon"])
    assert result.exit_code == 2
    assert "bad --client" in result.output

    result = runner.invoke(
        main,
        [
            "select",
            "--catalog", str(world_files["paths"]["catalog"]),
            "--query", "x",
            "--client", f"mock:{world_files['paths']['mock_rules']}",
            "--embedder", "telepathy",
        ],
    )
    assert result.exit_code == 2
    assert "bad --embedder" in result.output


def test_bench_rejects_unknown_method(runner, world_files):
    result = runner.invoke(
        main,
        [
            "bench",
            "--catalog", str(world_files["paths"]["catalog"]),
            "--cases", str(world_files["small_cases"]),
            "--method", "astrology",
            "--client", f"mock:{world_files['paths']['mock_rules']}",
            "--embedder", f"dict:{world_files['paths']['embeddings']}",
        ],
    )
    assert result.exit_code == 2


def test_bench_writes_json_report_with_default_tiers(runner, world_files, tmp_path):
    out = tmp_path / "report.json"
    result = runner.invoke(
        main,
        [
            "bench",
            "--catalog", str(world_files["paths"]["catalog"]),
            "--cases", str(world_files["small_cases"]),
            "--method", "hgmf",
            "--client", f"mock:{world_files['paths']['mock_rules']}",
            "--embedder", f"dict:{world_files['paths']['embeddings']}",
            "--out", str(out),
        ],
    )
    assert result.exit_code == 0, result.output
    report = json.loads(out.read_text())
    # standard tiers clipped to the 48-tool catalog, with N appended
    assert [t["sample_size"] for t in report["tiers"]] == [1, 3, 8, 21, 41, 48]
    assert report["method"] == "hgmf"
    assert report["model"] == "mock"  # derived from the client spec
    assert all(t["accuracy"] == 1.0 for t in report["tiers"])


def test_bench_csv_output_and_model_override(runner, world_files, tmp_path):
    out = tmp_path / "report.csv"
    result = runner.invoke(
        main,
        [
            "bench",
            "--catalog", str(world_files["paths"]["catalog"]),
            "--cases", str(world_files["small_cases"]),
            "--method", "mcp-zero",
            "--client", f"mock:{world_files['paths']['mock_rules']}",
            "--embedder", f"dict:{world_files['paths']['embeddings']}",
            "--tiers", "1,5",
            "--budget", "2",
            "--model", "offline-suite",
            "--out", str(out),
            "--format", "csv",
        ],
    )
    assert result.exit_code == 0, result.output
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "method,model,shot,accuracy,p50_ms,p95_ms"
    assert len(lines) == 3
    assert lines[1].startswith("mcp-zero,offline-suite,1,")
    assert lines[2].startswith("mcp-zero,offline-suite,5,")


def test_bench_bad_cases_file_is_runtime_error(runner, world_files, tmp_path):
    bad = tmp_path / "cases.json"
    bad.write_text(
        json.dumps(
            [
                {
                    "query": "q",
                    "query_embedding": [0.0] * 128,
                    "server_id": "s00",
                    "tool_id": "ghost-tool",
                }
            ]
        )
    )
    result = runner.invoke(
        main,
        [
            "bench",
            "--catalog", str(world_files["paths"]["catalog"]),
            "--cases", str(bad),
            "--method", "hgmf",
            "--client", f"mock:{world_files['paths']['mock_rules']}",
            "--embedder", f"dict:{world_files['paths']['embeddings']}",
            "--tiers", "1",
        ],
    )
    assert result.exit_code == 1
    assert "ghost-tool" in result.output
