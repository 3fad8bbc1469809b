"""Groundtruth fixtures: per-repository intermediate and final documents on disk.

Layout::

    <gt_root>/<owner>__<name>/<source_id>_<type_id>.json   # intermediates
    <gt_root>/<owner>__<name>/final_<type_id>.json         # finals
    <gt_root>/<owner>__<name>/inputs/<source_id>.txt       # optional shot inputs
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

from .errors import GroundtruthError
from .model import (
    DOC_TYPES,
    SOURCES,
    DocumentationSource,
    DocumentationType,
    RepositoryRef,
    StructuredDoc,
)

logger = logging.getLogger(__name__)

InputLoader = Callable[[RepositoryRef, DocumentationSource], "str | None"]


@dataclass
class GroundtruthSet:
    repo: RepositoryRef
    intermediates: dict[tuple[DocumentationType, DocumentationSource], StructuredDoc] = field(default_factory=dict)
    finals: dict[DocumentationType, StructuredDoc] = field(default_factory=dict)

    @property
    def is_complete(self) -> bool:
        return len(self.intermediates) == len(DOC_TYPES) * len(SOURCES) and len(self.finals) == len(DOC_TYPES)

    def has_full_type(self, doc_type: DocumentationType) -> bool:
        return doc_type in self.finals and all((doc_type, s) in self.intermediates for s in SOURCES)


def intermediate_filename(source: DocumentationSource, doc_type: DocumentationType) -> str:
    return f"{source.value}_{doc_type.value}.json"


def final_filename(doc_type: DocumentationType) -> str:
    return f"final_{doc_type.value}.json"


def parse_doc_filename(name: str) -> tuple[DocumentationSource | None, DocumentationType] | None:
    """Map a fixture filename to (source or None for finals, type); None if it is not one."""
    if not name.endswith(".json"):
        return None
    stem = name[: -len(".json")]
    head, sep, type_id = stem.rpartition("_")
    if not sep:
        return None
    try:
        doc_type = DocumentationType(type_id)
    except ValueError:
        return None
    if head == "final":
        return None, doc_type
    try:
        return DocumentationSource(head), doc_type
    except ValueError:
        return None


def _read_doc(path: Path) -> StructuredDoc:
    try:
        return StructuredDoc.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        raise GroundtruthError(f"cannot read groundtruth document {path}: {exc}") from exc


def load_repo_dir(repo_dir: Path) -> GroundtruthSet:
    repo = RepositoryRef.from_slug(repo_dir.name)
    gt = GroundtruthSet(repo)
    for path in sorted(repo_dir.glob("*.json")):
        parsed = parse_doc_filename(path.name)
        if parsed is None:
            logger.debug("ignoring non-fixture file %s", path)
            continue
        source, doc_type = parsed
        doc = _read_doc(path)
        if doc.doc_type != doc_type:
            raise GroundtruthError(f"{path}: doc_type {doc.doc_type.value!r} does not match filename")
        if doc.scope.source != source:
            raise GroundtruthError(f"{path}: scope {doc.scope} does not match filename")
        if source is None:
            gt.finals[doc_type] = doc
        else:
            gt.intermediates[(doc_type, source)] = doc
    return gt


def write_groundtruth_set(gt_root: Path, gt: GroundtruthSet) -> Path:
    repo_dir = Path(gt_root) / gt.repo.slug
    repo_dir.mkdir(parents=True, exist_ok=True)
    for (doc_type, source), doc in gt.intermediates.items():
        (repo_dir / intermediate_filename(source, doc_type)).write_text(doc.dumps(), encoding="utf-8")
    for doc_type, doc in gt.finals.items():
        (repo_dir / final_filename(doc_type)).write_text(doc.dumps(), encoding="utf-8")
    return repo_dir


class GroundtruthStore:
    """All groundtruth sets under a root, plus the extracted text their shots pair with."""

    def __init__(self, sets: Iterable[GroundtruthSet], inputs: dict | None = None,
                 input_loader: InputLoader | None = None):
        self.sets: dict[RepositoryRef, GroundtruthSet] = {s.repo: s for s in sets}
        self._inputs: dict[tuple[RepositoryRef, DocumentationSource], str] = dict(inputs or {})
        self._input_loader = input_loader
        self._lock = threading.Lock()

    @classmethod
    def load(cls, gt_root: str | Path, input_loader: InputLoader | None = None) -> "GroundtruthStore":
        root = Path(gt_root)
        if not root.is_dir():
            raise GroundtruthError(f"groundtruth root {root} is not a directory")
        sets = []
        inputs = {}
        for repo_dir in sorted(p for p in root.iterdir() if p.is_dir() and "__" in p.name):
            gt = load_repo_dir(repo_dir)
            sets.append(gt)
            for source in SOURCES:
                txt = repo_dir / "inputs" / f"{source.value}.txt"
                if txt.is_file():
                    inputs[(gt.repo, source)] = txt.read_text(encoding="utf-8")
        return cls(sets, inputs, input_loader)

    def __len__(self) -> int:
        return len(self.sets)

    def __contains__(self, repo: RepositoryRef) -> bool:
        return repo in self.sets

    @property
    def repos(self) -> list[RepositoryRef]:
        return sorted(self.sets, key=str)

    def counts(self) -> tuple[int, int]:
        """Total (intermediate, final) documents across all repositories."""
        return (
            sum(len(s.intermediates) for s in self.sets.values()),
            sum(len(s.finals) for s in self.sets.values()),
        )

    def intermediate(self, repo, doc_type, source) -> StructuredDoc:
        return self.sets[repo].intermediates[(doc_type, source)]

    def final(self, repo, doc_type) -> StructuredDoc:
        return self.sets[repo].finals[doc_type]

    def level1_donors(self, doc_type: DocumentationType, source: DocumentationSource) -> list[RepositoryRef]:
        return [r for r in self.repos if (doc_type, source) in self.sets[r].intermediates]

    def level2_donors(self, doc_type: DocumentationType) -> list[RepositoryRef]:
        return [r for r in self.repos if self.sets[r].has_full_type(doc_type)]

    def shot_input(self, repo: RepositoryRef, source: DocumentationSource) -> str:
        """Extracted source text the repo's intermediate groundtruth was curated from."""
        key = (repo, source)
        with self._lock:
            if key not in self._inputs and self._input_loader is not None:
                text = self._input_loader(repo, source)
                if text is not None:
                    self._inputs[key] = text
            return self._inputs.get(key, "")
