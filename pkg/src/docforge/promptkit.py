"""Shot selection and few-shot prompt assembly under a character budget."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import BudgetError, PromptError, ShotSelectionError
from .groundtruth import GroundtruthStore
from .model import (
    SOURCES,
    DocumentationSource,
    DocumentationType,
    RepositoryRef,
    StructuredDoc,
    fingerprint,
)
from .schema import validate_schema

DEFAULT_BUDGET_CHARS = 37_000
RECORD_MARKER = "### "

LEVEL1_INSTRUCTION = (
    "Learn the analogy between the following input and output examples and generate "
    "the output for the new input in the same json format."
)
LEVEL2_INSTRUCTION = (
    "Learn the analogy between the following input and output examples and generate "
    "the output for the new input in the same json format, consolidating the information "
    "in the intermediate outputs given as input."
)

LEVEL1_TEMPLATE = (
    "{instruction}\nInput: {ip1}\nOutput: {op1}\nInput: {ip2}\nOutput: {op2}\n"
    "Input: {context}\nOutput:"
)
LEVEL2_TEMPLATE = "{instruction}\nInput: {ip1}\nOutput: {op1}\nInput: {context}\nOutput:"


@dataclass(frozen=True)
class ShotPair:
    input_text: str
    output_doc: StructuredDoc
    origin_repo: RepositoryRef

    def __post_init__(self):
        violations = validate_schema(self.output_doc)
        if violations:
            raise PromptError(f"shot from {self.origin_repo} is invalid: {violations[0]}")


@dataclass(frozen=True)
class PromptText:
    text: str
    char_count: int
    fingerprint: str
    truncated_context: bool
    budget_chars: int


def make_prompt(text: str, budget_chars: int, truncated: bool = False) -> PromptText:
    if len(text) > budget_chars:
        raise BudgetError(f"prompt of {len(text)} chars exceeds budget of {budget_chars}")
    return PromptText(text, len(text), fingerprint(text), truncated, budget_chars)


def _record_boundaries(text: str) -> list[int]:
    positions = []
    start = 0
    while True:
        pos = text.find(RECORD_MARKER, start)
        if pos < 0:
            return positions
        if pos == 0 or text[pos - 1] == "\n":
            positions.append(pos)
        start = pos + 1


def fit_to_budget(context: str, budget_chars: int, overhead_chars: int,
                  retain: str = "head") -> tuple[str, bool]:
    """Trim ``context`` to ``budget_chars - overhead_chars`` characters.

    ``retain="head"`` keeps the oldest records and cuts at the last record
    boundary at or before the limit; ``"tail"`` keeps the newest and cuts at
    the first boundary at or after the overflow. Without a usable boundary
    the cut is made at the raw character limit.
    """
    if overhead_chars < 0 or budget_chars <= overhead_chars:
        raise BudgetError(f"budget {budget_chars} leaves no room after overhead {overhead_chars}")
    limit = budget_chars - overhead_chars
    if len(context) <= limit:
        return context, False
    bounds = _record_boundaries(context)
    if retain == "head":
        usable = [b for b in bounds if 0 < b <= limit]
        return context[: usable[-1] if usable else limit], True
    if retain == "tail":
        start = len(context) - limit
        usable = [b for b in bounds if b >= start]
        return context[usable[0] if usable else start:], True
    raise ValueError(f"retain must be 'head' or 'tail', not {retain!r}")


def default_seed(target_repo: RepositoryRef, doc_type: DocumentationType,
                 source: DocumentationSource | None = None) -> int:
    key = f"{target_repo}|{doc_type.value}|{source.value if source else 'final'}"
    return int(fingerprint(key), 16)


def select_level1_shots(doc_type: DocumentationType, source: DocumentationSource,
                        target_repo: RepositoryRef, gt_store: GroundtruthStore,
                        seed: int | None = None) -> tuple[ShotPair, ShotPair]:
    """Pick two exemplar pairs from two distinct donor repositories other than the target."""
    donors = [r for r in gt_store.level1_donors(doc_type, source) if r != target_repo]
    if len(donors) < 2:
        raise ShotSelectionError(
            f"need intermediates for ({doc_type.value}, {source.value}) from two repositories "
            f"other than {target_repo}; found {len(donors)}: {', '.join(map(str, donors)) or 'none'}"
        )
    if seed is None:
        seed = default_seed(target_repo, doc_type, source)
    first, second = random.Random(seed).sample(donors, 2)
    return tuple(
        ShotPair(gt_store.shot_input(r, source), gt_store.intermediate(r, doc_type, source), r)
        for r in (first, second)
    )


def select_level2_exemplar(doc_type: DocumentationType, target_repo: RepositoryRef,
                           gt_store: GroundtruthStore, seed: int | None = None
                           ) -> tuple[list[StructuredDoc], StructuredDoc]:
    donors = [r for r in gt_store.level2_donors(doc_type) if r != target_repo]
    if not donors:
        raise ShotSelectionError(
            f"no repository other than {target_repo} has all five intermediates and a final "
            f"groundtruth for {doc_type.value!r}"
        )
    if seed is None:
        seed = default_seed(target_repo, doc_type)
    donor = random.Random(seed).choice(donors)
    return [gt_store.intermediate(donor, doc_type, s) for s in SOURCES], gt_store.final(donor, doc_type)


def trim_shot(shot: ShotPair, limit: int, retain: str = "head") -> ShotPair:
    """Shorten a shot's input text so two shots leave room for the context."""
    text, cut = fit_to_budget(shot.input_text, limit, 0, retain)
    return ShotPair(text, shot.output_doc, shot.origin_repo) if cut else shot


def build_level1_prompt(shots: Sequence[ShotPair], context_input: str, doc_type: DocumentationType,
                        budget_chars: int = DEFAULT_BUDGET_CHARS, retain: str = "head") -> PromptText:
    first, second = shots
    for shot in (first, second):
        if shot.output_doc.doc_type != doc_type:
            raise PromptError(f"shot from {shot.origin_repo} is {shot.output_doc.doc_type.value}, "
                              f"expected {doc_type.value}")
    fields = dict(
        instruction=LEVEL1_INSTRUCTION,
        ip1=first.input_text,
        op1=first.output_doc.payload_json(),
        ip2=second.input_text,
        op2=second.output_doc.payload_json(),
    )
    overhead = len(LEVEL1_TEMPLATE.format(context="", **fields))
    if overhead >= budget_chars:
        raise BudgetError(f"shots alone take {overhead} chars, budget is {budget_chars}")
    context, truncated = fit_to_budget(context_input, budget_chars, overhead, retain)
    return make_prompt(LEVEL1_TEMPLATE.format(context=context, **fields), budget_chars, truncated)


def _by_source(docs: Mapping[DocumentationSource, StructuredDoc] | Iterable[StructuredDoc],
               doc_type: DocumentationType, what: str) -> list[StructuredDoc]:
    if isinstance(docs, Mapping):
        mapping = dict(docs)
    else:
        mapping = {d.scope.source: d for d in docs}
    missing = [s.value for s in SOURCES if s not in mapping]
    if missing:
        raise PromptError(f"{what} missing for source(s): {', '.join(missing)}")
    ordered = [mapping[s] for s in SOURCES]
    for doc in ordered:
        if doc.doc_type != doc_type:
            raise PromptError(f"{what} for {doc.scope} is {doc.doc_type.value}, expected {doc_type.value}")
    return ordered


def _shrink_section(doc: StructuredDoc, cap: int) -> str:
    text = doc.payload_json()
    entries = list(doc.entries)
    while len(text) > cap and entries:
        entries.pop()
        text = StructuredDoc(doc.doc_type, doc.scope, tuple(entries)).payload_json()
    return text[:cap]


def build_level2_prompt(one_shot: tuple[Sequence[StructuredDoc] | Mapping, StructuredDoc],
                        intermediates: Sequence[StructuredDoc] | Mapping,
                        doc_type: DocumentationType,
                        budget_chars: int = DEFAULT_BUDGET_CHARS) -> PromptText:
    """Consolidation prompt: one exemplar (intermediates -> final), then the new intermediates.

    If the five new intermediates do not fit, each one that exceeds an equal
    fifth of the remaining space is cut down to it, dropping whole trailing
    entries first.
    """
    example_inputs, example_final = one_shot
    example_inputs = _by_source(example_inputs, doc_type, "exemplar intermediate")
    if example_final.doc_type != doc_type or not example_final.scope.is_final:
        raise PromptError("exemplar final must be an all-sources document of the requested type")
    current = _by_source(intermediates, doc_type, "intermediate")

    fields = dict(
        instruction=LEVEL2_INSTRUCTION,
        ip1="\n".join(d.payload_json() for d in example_inputs),
        op1=example_final.payload_json(),
    )
    overhead = len(LEVEL2_TEMPLATE.format(context="", **fields))
    if overhead >= budget_chars:
        raise BudgetError(f"exemplar alone takes {overhead} chars, budget is {budget_chars}")
    sections = [d.payload_json() for d in current]
    available = budget_chars - overhead - (len(sections) - 1)
    truncated = False
    if sum(map(len, sections)) > available:
        cap = max(available, 0) // len(sections)
        sections = [s if len(s) <= cap else _shrink_section(d, cap) for s, d in zip(sections, current)]
        truncated = True
    text = LEVEL2_TEMPLATE.format(context="\n".join(sections), **fields)
    return make_prompt(text, budget_chars, truncated)
