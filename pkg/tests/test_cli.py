import json
from pathlib import Path

import pytest

from docforge.cli import main
from docforge.model import SOURCES, DocumentationType
from docforge.synth import FIXTURE_DIR

GT = FIXTURE_DIR / "groundtruth"
ARCHIVE = FIXTURE_DIR / "archive"
TARGET = "fixture/repo00"
GOLDEN = Path(__file__).parent / "golden"


def generate(tmp_path, *extra, out="out", doc_type="error"):
    return main(["generate", "--repo", TARGET, "--doc-type", doc_type, "--out", str(tmp_path / out),
                 "--gt", str(GT), "--archive", str(ARCHIVE), "--cache-dir", str(tmp_path / "cache"),
                 "--mock-fixtures", str(GT / "fixture__repo00"), *extra])


def test_help_lists_taxonomy(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--help"])
    assert info.value.code == 0
    text = capsys.readouterr().out
    for t in DocumentationType:
        assert t.value in text
    for s in SOURCES:
        assert s.value in text


def test_unknown_doc_type_is_usage_error(capsys, tmp_path):
    assert generate(tmp_path, doc_type="architecture") == 1
    err = capsys.readouterr().err
    assert all(t.value in err for t in DocumentationType)


def test_unknown_flag_rejected_before_work(tmp_path):
    assert main(["ingest", "--repo", TARGET, "--bogus"]) == 1
    assert not (tmp_path / "cache").exists()


def test_malformed_repo(capsys):
    assert main(["ingest", "--repo", "justname"]) == 1
    assert "owner/name" in capsys.readouterr().err


def test_missing_command_and_flags():
    assert main([]) == 1
    assert main(["evaluate"]) == 1


def test_ingest_all_sources(tmp_path, capsys):
    assert main(["ingest", "--repo", TARGET, "--archive", str(ARCHIVE), "--cache-dir", str(tmp_path)]) == 0
    assert sorted(p.name for p in (tmp_path / "fixture__repo00").iterdir()) == sorted(
        f"{s.value}.jsonl" for s in SOURCES)
    lines = capsys.readouterr().out.strip().splitlines()
    assert [l.split(":")[0] for l in lines] == [s.value for s in SOURCES]


def test_ingest_network_down_exits_2(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr("time.sleep", lambda seconds: None)
    # a closed local port stands in for an unreachable API
    code = main(["ingest", "--repo", TARGET, "--cache-dir", str(tmp_path), "--source", "commits",
                 "--api-base-url", "http://127.0.0.1:9"])
    assert code == 2
    assert "ingest" in capsys.readouterr().err


def _config(tmp_path, **values):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(values))
    return path


def test_config_supplies_defaults_and_flags_win(tmp_path):
    cfg = _config(tmp_path, repo="bad", archive=str(ARCHIVE), cache_dir=str(tmp_path / "c"))
    assert main(["--config", str(cfg), "ingest"]) == 1
    assert main(["--config", str(cfg), "ingest", "--repo", TARGET, "--source", "issues"]) == 0
    assert (tmp_path / "c" / "fixture__repo00" / "issues.jsonl").is_file()


def test_generate_matches_fixture(tmp_path, capsys):
    assert generate(tmp_path) == 0
    out = tmp_path / "out" / "fixture__repo00" / "error"
    final = json.loads((out / "final.json").read_text())
    expected = json.loads((GT / "fixture__repo00" / "final_error.json").read_text())
    assert final["entries"] == expected["entries"]
    assert "llm_calls=6, repairs=0" in capsys.readouterr().out


def test_offline_cold_cache_names_missing_bundles(tmp_path, capsys):
    assert generate(tmp_path, "--offline") == 2
    err = capsys.readouterr().err
    assert all(s.value in err for s in SOURCES)


def test_bad_mock_fault_spec(tmp_path):
    assert generate(tmp_path, "--mock-fault", "commits") == 1
    assert generate(tmp_path, "--mock-fault", "commits=explode") == 1


def test_http_provider_needs_url(tmp_path, monkeypatch):
    monkeypatch.delenv("DOCFORGE_LLM_URL", raising=False)
    assert generate(tmp_path, "--provider", "http") == 1


def test_evaluate_self_and_empty(tmp_path, capsys):
    report = tmp_path / "r.md"
    assert main(["evaluate", "--generated", str(GT), "--groundtruth", str(GT), "--report", str(report)]) == 0
    text = report.read_text()
    assert "1.00" in text and "0.99" not in text
    (tmp_path / "empty").mkdir()
    assert main(["evaluate", "--generated", str(tmp_path / "empty"), "--groundtruth", str(GT)]) == 2


def test_evaluate_from_matrix_matches_golden(tmp_path, capsys):
    matrix = Path(__file__).parent / "data" / "published_matrix.json"
    assert main(["evaluate", "--from-matrix", str(matrix)]) == 0
    assert capsys.readouterr().out == (GOLDEN / "report.md").read_text()
    assert main(["evaluate", "--from-matrix", str(matrix), "--format", "csv", "--report", str(tmp_path / "r.csv")]) == 0
    assert (tmp_path / "r.csv").read_text() == (GOLDEN / "report.csv").read_text()


def test_json_logs(tmp_path, capsys):
    assert main(["--json-logs", "ingest", "--repo", TARGET, "--archive", str(ARCHIVE),
                 "--cache-dir", str(tmp_path), "--source", "issues"]) == 0
    lines = [l for l in capsys.readouterr().err.splitlines() if l.strip()]
    assert lines and all(json.loads(l)["logger"].startswith("docforge") for l in lines)
