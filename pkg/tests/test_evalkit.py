import json
import math
import shutil
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from docforge.evalkit import (
    EvaluationError,
    SampleSpec,
    ScoreMatrix,
    bleu4,
    evaluate_corpus,
    lcs_length,
    render_report,
    rouge_l,
    sample_size,
    tokenize,
)
from oracles import bleu_oracle, cochran_oracle, lcs_oracle

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"

tokens = st.lists(st.sampled_from(list("abcde")), max_size=30)


def test_tokenizer_examples():
    assert tokenize("The API, returns JSON.") == ["the", "api", ",", "returns", "json", "."]
    assert tokenize('summary: "crash" {x} [y]') == ["summary", ":", "crash", "x", "y"]
    assert tokenize("a , b : c") == ["a", "b", "c"]
    assert tokenize("") == []


def test_bleu_frozen_values():
    # hand-derived: all clipped precisions 1, brevity exp(1 - 5/3)
    assert bleu4("a b c".split(), "a b c d e".split()) == pytest.approx(math.exp(-2 / 3), abs=1e-12)
    # (3/4 * 1/3 * 1/2) ** (1/3) = 0.5
    assert bleu4("the cat sat".split(), "the dog sat".split()) == pytest.approx(0.5, abs=1e-12)
    assert bleu4([], ["a"]) == 0.0


def test_bleu_exact_match():
    hyp = "the quick brown fox jumps".split()
    assert bleu4(hyp, hyp) == pytest.approx(1.0)
    assert bleu4(hyp, hyp) > 0.9


def test_rouge_frozen_values():
    r = rouge_l("a b c d".split(), "a x c y".split())
    assert (r.lcs, r.precision, r.recall, r.f1) == (2, 0.5, 0.5, 0.5)
    assert rouge_l([], ["a"]).f1 == 0.0


@given(tokens, tokens)
def test_bleu_matches_oracle(h, r):
    assert abs(bleu4(h, r) - bleu_oracle(h, r)) <= 1e-9


@given(tokens, tokens)
def test_lcs_matches_oracle(a, b):
    assert lcs_length(a, b) == lcs_oracle(a, b)


@given(tokens, tokens)
def test_metric_bounds_and_symmetry(h, r):
    assert 0.0 <= bleu4(h, r) <= 1.0
    assert lcs_length(h, r) == lcs_length(r, h)
    f = rouge_l(h, r).f1
    assert 0.0 <= f <= 1.0 and f == pytest.approx(rouge_l(r, h).f1)


def test_sample_sizes():
    assert sample_size(SampleSpec(1_350_000)) == 664
    assert sample_size(SampleSpec(1_350_000, confidence=0.95)) == 385
    assert sample_size(SampleSpec(100)) == 88


@given(st.integers(1, 10**7), st.floats(0.5, 0.999), st.floats(0.01, 0.3))
def test_sample_size_matches_oracle(n, conf, margin):
    from statistics import NormalDist

    z = NormalDist().inv_cdf(1 - (1 - conf) / 2)
    expected = cochran_oracle(n, z, 0.5, margin)
    got = sample_size(SampleSpec(n, conf, margin))
    assert got >= expected - 1e-6 and got - expected < 1 + 1e-6
    assert 1 <= got <= n


@pytest.mark.parametrize("kwargs", [dict(population=0), dict(population=5, confidence=1.0),
                                    dict(population=5, margin=0.0)])
def test_sample_spec_validation(kwargs):
    with pytest.raises(ValueError):
        SampleSpec(**kwargs)


def published():
    return ScoreMatrix.from_json(json.loads((DATA / "published_matrix.json").read_text()))


def test_published_goldens():
    assert render_report(published(), "markdown") == (GOLDEN / "report.md").read_text()
    assert render_report(published(), "csv") == (GOLDEN / "report.csv").read_text()


def test_published_average_is_near_reported_mean():
    # the cell mean of the published per-source BLEU table
    assert published().averages["bleu4_mean"] == pytest.approx(0.30142, abs=1e-5)


def test_matrix_json_round_trip():
    m = published()
    assert ScoreMatrix.from_json(json.loads(json.dumps(m.to_json()))).to_json() == m.to_json()


def test_empty_cells_and_coverage_render():
    m = ScoreMatrix(coverage=["skipped x"])
    md = render_report(m)
    assert "—" in md and "## Coverage" in md and "- skipped x" in md
    with pytest.raises(ValueError):
        render_report(m, "html")


def test_self_evaluation_and_coverage(fixture_tree, tmp_path):
    gt_root, _, repos = fixture_tree
    m = evaluate_corpus(gt_root, gt_root)
    assert len(m.per_pair) == 25 and len(m.per_type_final) == 5
    assert all(c.rouge_f == pytest.approx(1.0) for c in list(m.per_pair.values()) + list(m.per_type_final.values()))
    assert m.coverage == []
    partial = tmp_path / "gen"
    shutil.copytree(gt_root / repos[0].slug, partial / repos[0].slug)
    m = evaluate_corpus(partial, gt_root)
    assert len(m.coverage) == 3 * 30
    assert all(note.startswith("skipped") for note in m.coverage)


def test_evaluate_reads_pipeline_layout(fixture_tree, tmp_path):
    gt_root, _, repos = fixture_tree
    src = gt_root / repos[0].slug
    out = tmp_path / "gen" / repos[0].slug / "api"
    out.mkdir(parents=True)
    shutil.copy(src / "final_api.json", out / "final.json")
    shutil.copy(src / "issues_api.json", out / "intermediate_issues.json")
    m = evaluate_corpus(tmp_path / "gen", gt_root)
    assert len(m.per_pair) == 1 and len(m.per_type_final) == 1


def test_no_overlap_is_an_error(tmp_path, fixture_tree):
    (tmp_path / "empty").mkdir()
    with pytest.raises(EvaluationError):
        evaluate_corpus(tmp_path / "empty", fixture_tree[0])
