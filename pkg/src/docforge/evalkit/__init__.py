"""BLEU-4 / ROUGE-L scoring against groundtruth, sample sizing and result tables."""

from .corpus import EvaluationError, ScoreMatrix, collect_docs, evaluate_corpus, score_pair
from .metrics import RougeL, bleu4, lcs_length, rouge_l, tokenize
from .report import render_csv, render_markdown, render_report
from .sampling import SampleSpec, sample_size

__all__ = [
    "EvaluationError",
    "RougeL",
    "SampleSpec",
    "ScoreMatrix",
    "bleu4",
    "collect_docs",
    "evaluate_corpus",
    "lcs_length",
    "render_csv",
    "render_markdown",
    "render_report",
    "rouge_l",
    "sample_size",
    "score_pair",
    "tokenize",
]
