"""Scoring a directory of generated documents against groundtruth fixtures."""

from __future__ import annotations

import json
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from statistics import fmean
from typing import Any, Mapping

from ..errors import DocforgeError
from ..groundtruth import parse_doc_filename
from ..model import (
    DOC_TYPES,
    SOURCES,
    DocumentationSource,
    DocumentationType,
    EvalScores,
    RepositoryRef,
    StructuredDoc,
)
from ..schema import canonical_text
from .metrics import bleu4, rouge_l, tokenize

logger = logging.getLogger(__name__)

Cell = tuple[DocumentationType, DocumentationSource]
DocKey = tuple[RepositoryRef, DocumentationType, "DocumentationSource | None"]


class EvaluationError(DocforgeError):
    pass


@dataclass
class ScoreMatrix:
    per_pair: dict[Cell, EvalScores] = field(default_factory=dict)
    per_type_final: dict[DocumentationType, EvalScores] = field(default_factory=dict)
    coverage: list[str] = field(default_factory=list)

    @property
    def averages(self) -> dict[str, float]:
        """Means over the populated per-source cells (final cells if there are none)."""
        cells = list(self.per_pair.values()) or list(self.per_type_final.values())
        if not cells:
            return {"bleu4_mean": 0.0, "rouge_f_mean": 0.0}
        return {
            "bleu4_mean": fmean(c.bleu4 for c in cells),
            "rouge_f_mean": fmean(c.rouge_f for c in cells),
        }

    def to_json(self) -> dict[str, Any]:
        def scores(s: EvalScores) -> dict:
            return {"bleu4": s.bleu4, "rouge_p": s.rouge_p, "rouge_r": s.rouge_r, "rouge_f": s.rouge_f}

        return {
            "per_pair": [
                {"doc_type": t.value, "source": s.value, **scores(v)}
                for (t, s), v in sorted(self.per_pair.items(), key=lambda kv: (DOC_TYPES.index(kv[0][0]), SOURCES.index(kv[0][1])))
            ],
            "per_type_final": [
                {"doc_type": t.value, **scores(v)}
                for t, v in sorted(self.per_type_final.items(), key=lambda kv: DOC_TYPES.index(kv[0]))
            ],
            "averages": self.averages,
            "coverage": list(self.coverage),
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "ScoreMatrix":
        def scores(d: Mapping) -> EvalScores:
            return EvalScores(
                bleu4=d.get("bleu4", 0.0),
                rouge_p=d.get("rouge_p", d.get("rouge_f", 0.0)),
                rouge_r=d.get("rouge_r", d.get("rouge_f", 0.0)),
                rouge_f=d.get("rouge_f", 0.0),
            )

        return cls(
            per_pair={
                (DocumentationType.parse(row["doc_type"]), DocumentationSource.parse(row["source"])): scores(row)
                for row in data.get("per_pair", [])
            },
            per_type_final={
                DocumentationType.parse(row["doc_type"]): scores(row) for row in data.get("per_type_final", [])
            },
            coverage=list(data.get("coverage", [])),
        )


def score_pair(generated: StructuredDoc, reference: StructuredDoc) -> EvalScores:
    hyp = tokenize(canonical_text(generated))
    ref = tokenize(canonical_text(reference))
    rouge = rouge_l(hyp, ref)
    return EvalScores(bleu4(hyp, ref), rouge.precision, rouge.recall, rouge.f1)


def _load(path: Path) -> StructuredDoc:
    try:
        return StructuredDoc.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        raise EvaluationError(f"cannot read {path}: {exc}") from exc


def collect_docs(root: str | Path) -> dict[DocKey, StructuredDoc]:
    """Index documents under ``root`` by (repo, type, source-or-None).

    Accepts both the groundtruth layout (``<repo>/<source>_<type>.json``,
    ``<repo>/final_<type>.json``) and the pipeline output layout
    (``<repo>/<type>/intermediate_<source>.json``, ``<repo>/<type>/final.json``).
    """
    docs: dict[DocKey, StructuredDoc] = {}
    root = Path(root)
    if not root.is_dir():
        raise EvaluationError(f"{root} is not a directory")
    for repo_dir in sorted(p for p in root.iterdir() if p.is_dir() and "__" in p.name):
        repo = RepositoryRef.from_slug(repo_dir.name)
        for path in sorted(repo_dir.glob("*.json")):
            parsed = parse_doc_filename(path.name)
            if parsed is not None:
                source, doc_type = parsed
                docs[(repo, doc_type, source)] = _load(path)
        for doc_type in DOC_TYPES:
            type_dir = repo_dir / doc_type.value
            if not type_dir.is_dir():
                continue
            if (type_dir / "final.json").is_file():
                docs[(repo, doc_type, None)] = _load(type_dir / "final.json")
            for source in SOURCES:
                path = type_dir / f"intermediate_{source.value}.json"
                if path.is_file():
                    docs[(repo, doc_type, source)] = _load(path)
    return docs


def _describe(key: DocKey) -> str:
    repo, doc_type, source = key
    return f"{repo} {doc_type.value}/{source.value if source else 'final'}"


def _mean_scores(values: list[EvalScores]) -> EvalScores:
    return EvalScores(
        bleu4=fmean(v.bleu4 for v in values),
        rouge_p=fmean(v.rouge_p for v in values),
        rouge_r=fmean(v.rouge_r for v in values),
        rouge_f=fmean(v.rouge_f for v in values),
    )


def evaluate_corpus(generated_root: str | Path, gt_root: str | Path) -> ScoreMatrix:
    generated = collect_docs(generated_root)
    reference = collect_docs(gt_root)
    buckets: dict[tuple[DocumentationType, DocumentationSource | None], list[EvalScores]] = defaultdict(list)
    coverage = []
    for key in sorted(set(generated) | set(reference), key=_describe):
        if key not in generated:
            coverage.append(f"skipped {_describe(key)}: no generated document")
            continue
        if key not in reference:
            coverage.append(f"skipped {_describe(key)}: no groundtruth document")
            continue
        _, doc_type, source = key
        buckets[(doc_type, source)].append(score_pair(generated[key], reference[key]))
    if not buckets:
        raise EvaluationError(
            f"no generated document in {generated_root} has a groundtruth counterpart in {gt_root}"
        )
    matrix = ScoreMatrix(coverage=coverage)
    for (doc_type, source), values in buckets.items():
        if source is None:
            matrix.per_type_final[doc_type] = _mean_scores(values)
        else:
            matrix.per_pair[(doc_type, source)] = _mean_scores(values)
    return matrix
