"""Markdown and CSV rendering of a ScoreMatrix as three result tables."""

from __future__ import annotations

import csv
import io

from ..model import DOC_TYPES, SOURCES
from .corpus import ScoreMatrix

EMPTY = "—"

TITLES = {
    "rouge_l": "ROUGE-L per documentation type and source",
    "bleu4": "BLEU-4 per documentation type and source",
    "final": "ROUGE-L and BLEU-4 of documentation consolidated across all sources",
}


def _rouge(value: float) -> str:
    return f"{value:.2f}"


def _bleu(value: float) -> str:
    return f"{value * 100:.2f}%"


def _row(cells: list[str]) -> str:
    return "| " + " | ".join(cells) + " |"


def _bold_max(values: list[float | None], fmt) -> list[str]:
    present = [v for v in values if v is not None]
    top = max(present) if present else None
    out = []
    for v in values:
        if v is None:
            out.append(EMPTY)
        elif v == top:
            out.append(f"**{fmt(v)}**")
        else:
            out.append(fmt(v))
    return out


def _pair_table(matrix: ScoreMatrix, metric: str, fmt) -> list[str]:
    lines = [_row(["Documentation type"] + [s.label for s in SOURCES]), _row(["---"] * (len(SOURCES) + 1))]
    for doc_type in DOC_TYPES:
        values = []
        for source in SOURCES:
            cell = matrix.per_pair.get((doc_type, source))
            values.append(getattr(cell, metric) if cell else None)
        lines.append(_row([doc_type.label] + _bold_max(values, fmt)))
    return lines


def _final_table(matrix: ScoreMatrix) -> list[str]:
    # units differ between the two columns, so maxima are marked per column
    cells = [matrix.per_type_final.get(t) for t in DOC_TYPES]
    rouge = _bold_max([c.rouge_f if c else None for c in cells], _rouge)
    bleu = _bold_max([c.bleu4 if c else None for c in cells], _bleu)
    lines = [_row(["Documentation type", "ROUGE-L", "BLEU-4"]), _row(["---"] * 3)]
    for doc_type, r, b in zip(DOC_TYPES, rouge, bleu):
        lines.append(_row([doc_type.label, r, b]))
    return lines


def render_markdown(matrix: ScoreMatrix) -> str:
    blocks = [
        [f"## {TITLES['rouge_l']}", ""] + _pair_table(matrix, "rouge_f", _rouge),
        [f"## {TITLES['bleu4']}", ""] + _pair_table(matrix, "bleu4", _bleu),
        [f"## {TITLES['final']}", ""] + _final_table(matrix),
    ]
    if matrix.coverage:
        blocks.append(["## Coverage", ""] + [f"- {note}" for note in matrix.coverage])
    return "\n\n".join("\n".join(b) for b in blocks) + "\n"


def render_csv(matrix: ScoreMatrix) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["table", "row", "column", "value"])
    for table, metric in (("rouge_l", "rouge_f"), ("bleu4", "bleu4")):
        for doc_type in DOC_TYPES:
            for source in SOURCES:
                cell = matrix.per_pair.get((doc_type, source))
                if cell is not None:
                    writer.writerow([table, doc_type.label, source.label, f"{getattr(cell, metric):.6f}"])
    for doc_type in DOC_TYPES:
        cell = matrix.per_type_final.get(doc_type)
        if cell is not None:
            writer.writerow(["final", doc_type.label, "ROUGE-L", f"{cell.rouge_f:.6f}"])
            writer.writerow(["final", doc_type.label, "BLEU-4", f"{cell.bleu4:.6f}"])
    for note in matrix.coverage:
        writer.writerow(["coverage", "", "", note])
    return buf.getvalue()


def render_report(matrix: ScoreMatrix, format: str = "markdown") -> str:
    if format in ("markdown", "md"):
        return render_markdown(matrix)
    if format == "csv":
        return render_csv(matrix)
    raise ValueError(f"unknown report format {format!r}; expected markdown or csv")
