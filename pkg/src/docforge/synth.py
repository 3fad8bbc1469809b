"""Deterministic synthetic groundtruth and artifact archives for offline runs and tests."""

from __future__ import annotations

import json
import random
from datetime import datetime, timedelta, timezone
from pathlib import Path

from .ingestion import ArchiveClient, IngestionConfig, build_bundle, fetch_artifacts
from .groundtruth import GroundtruthSet, write_groundtruth_set
from .model import (
    DOC_TYPES,
    SOURCES,
    DocMetadata,
    DocumentationSource,
    DocumentationType,
    RepositoryRef,
    Scope,
    StructuredDoc,
    format_timestamp,
)
from .schema import PROJECT_CATEGORIES

FIXTURE_DIR = Path(__file__).parent / "data" / "fixtures"

_NOUNS = ["parser", "client", "session", "cache", "router", "token", "buffer", "schema", "worker",
          "config", "handler", "stream", "index", "plugin", "queue", "logger", "store", "request"]
_VERBS = ["returns", "validates", "loads", "flushes", "retries", "rejects", "wraps", "exposes",
          "normalises", "streams", "caches", "resolves"]
_ADJ = ["optional", "nested", "empty", "stale", "concurrent", "unicode", "large", "default", "legacy"]
_LICENSES = ["MIT", "Apache-2.0", "BSD-3-Clause", "GPL-3.0-only", "MPL-2.0"]
_PERMS = ["commercial use", "modification", "distribution", "private use", "patent use"]
_DIRS = ["src", "lib", "docs", "tests", "scripts"]


def _phrase(rng: random.Random, words: int = 6) -> str:
    out = []
    for _ in range(words):
        out.append(rng.choice(_NOUNS + _VERBS + _ADJ))
    return " ".join(out)


def _sentence(rng: random.Random) -> str:
    return (f"The {rng.choice(_ADJ)} {rng.choice(_NOUNS)} {rng.choice(_VERBS)} "
            f"the {rng.choice(_NOUNS)} when {_phrase(rng, 4)}.")


def _refs(rng: random.Random, source: DocumentationSource | None) -> list[str]:
    src = source or rng.choice(SOURCES)
    if src in (DocumentationSource.PULL_REQUESTS, DocumentationSource.ISSUES):
        return [f"#{rng.randint(1, 400)}" for _ in range(rng.randint(1, 2))]
    if src is DocumentationSource.COMMITS:
        return ["%012x" % rng.getrandbits(48)]
    return [f"{rng.choice(_DIRS)}/{rng.choice(_NOUNS)}.py"]


def _entry(rng: random.Random, doc_type: DocumentationType, source: DocumentationSource | None) -> dict:
    noun = rng.choice(_NOUNS)
    if doc_type is DocumentationType.API:
        return {
            "name": f"{noun.capitalize()}{rng.choice(_NOUNS).capitalize()}",
            "description": _sentence(rng),
            "members": [
                {"name": f"{rng.choice(_VERBS)}_{rng.choice(_NOUNS)}", "kind": rng.choice(["method", "field"]),
                 "description": _sentence(rng)}
                for _ in range(rng.randint(1, 3))
            ],
            "source_refs": _refs(rng, source),
        }
    if doc_type is DocumentationType.ERROR_BUG:
        return {
            "summary": f"{noun} {rng.choice(_VERBS)} {rng.choice(_ADJ)} input",
            "cause": _sentence(rng),
            "resolution": _sentence(rng),
            "status": rng.choice(["fixed", "open", "wontfix"]),
            "source_refs": _refs(rng, source),
        }
    if doc_type is DocumentationType.FILE:
        return {
            "path": f"{rng.choice(_DIRS)}/{noun}.py",
            "change": rng.choice(["added", "modified", "removed", "renamed"]),
            "description": _sentence(rng),
            "dependencies": [f"{rng.choice(_DIRS)}/{rng.choice(_NOUNS)}.py"],
            "source_refs": _refs(rng, source),
        }
    if doc_type is DocumentationType.LICENSE:
        return {
            "license_name": rng.choice(_LICENSES),
            "permissions": rng.sample(_PERMS, 2),
            "scope": rng.choice(["whole repository", f"{rng.choice(_DIRS)}/ only"]),
            "source_refs": _refs(rng, source),
        }
    return {
        "category": rng.choice(PROJECT_CATEGORIES),
        "description": _sentence(rng),
        "source_refs": _refs(rng, source),
    }


def synthetic_doc(repo: RepositoryRef, doc_type: DocumentationType, source: DocumentationSource | None,
                  seed: int = 0, n_entries: int | None = None) -> StructuredDoc:
    rng = random.Random(f"{seed}:{repo}:{doc_type.value}:{source.value if source else 'final'}")
    count = n_entries if n_entries is not None else rng.randint(2, 4)
    entries = [_entry(rng, doc_type, source) for _ in range(count)]
    return StructuredDoc(doc_type, Scope(source), entries, DocMetadata())


def synthetic_groundtruth_set(repo: RepositoryRef, seed: int = 0) -> GroundtruthSet:
    gt = GroundtruthSet(repo)
    for doc_type in DOC_TYPES:
        for source in SOURCES:
            gt.intermediates[(doc_type, source)] = synthetic_doc(repo, doc_type, source, seed)
        gt.finals[doc_type] = synthetic_doc(repo, doc_type, None, seed)
    return gt


def synthetic_repos(n: int, owner: str = "fixture") -> list[RepositoryRef]:
    return [RepositoryRef(owner, f"repo{k:02d}") for k in range(n)]


def synthetic_archive(repo: RepositoryRef, seed: int = 0, n_topics: int = 12) -> dict[str, list[dict]]:
    """Raw artifact streams in the archive format read by ``ArchiveClient``."""
    rng = random.Random(f"{seed}:archive:{repo}")
    start = datetime(2023, 1, 1, tzinfo=timezone.utc)

    def when(k: int) -> str:
        return format_timestamp(start + timedelta(days=k, hours=rng.randint(0, 23)))

    prs = [{"number": 2 * k + 1, "title": f"Fix {_phrase(rng, 3)}", "body": _sentence(rng),
            "comments": [_sentence(rng)], "created_at": when(2 * k)} for k in range(n_topics)]
    issues = [{"number": 2 * k + 2, "title": f"{rng.choice(_NOUNS)} fails on {rng.choice(_ADJ)} input",
               "body": _sentence(rng), "comments": [], "created_at": when(2 * k + 1)} for k in range(n_topics)]
    commits = [{"sha": "%040x" % rng.getrandbits(160), "message": f"{rng.choice(_VERBS)} {_phrase(rng, 4)}",
                "created_at": when(k)} for k in range(n_topics)]
    files = [
        {"path": "README.md", "content": f"# {repo.name}\n\n{_sentence(rng)}\n\n## Usage\n\n{_sentence(rng)}\n"},
        {"path": "LICENSE.txt", "content": f"{rng.choice(_LICENSES)} license\n\n{_sentence(rng)}\n"},
        {"path": "src/core.py", "content": f'"""{_sentence(rng)}"""\n\n# {_sentence(rng)}\nx = "# not a comment"\n'},
        {"path": "src/api.c", "content": f"/* {_sentence(rng)} */\nint f(void) {{ return 0; }} // {_sentence(rng)}\n"},
    ]
    return {"pull_requests": prs, "issues": issues, "commits": commits, "files": files}


def write_archive(root: Path, repo: RepositoryRef, streams: dict[str, list[dict]]) -> Path:
    repo_dir = Path(root) / repo.slug
    repo_dir.mkdir(parents=True, exist_ok=True)
    for stream, rows in streams.items():
        with (repo_dir / f"{stream}.jsonl").open("w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n")
    return repo_dir


def archive_input_text(archive_root: Path, repo: RepositoryRef, source: DocumentationSource) -> str:
    """Extracted text of one archived stream, framed the way bundles render it."""
    cfg = IngestionConfig(cache_dir=Path(archive_root))
    records = fetch_artifacts(repo, source, cfg, ArchiveClient(archive_root))
    return build_bundle(repo, source, records).extracted_text


def write_fixture_tree(root: str | Path, n_repos: int = 4, seed: int = 0,
                       with_inputs: bool = True) -> tuple[Path, Path, list[RepositoryRef]]:
    """Write ``<root>/groundtruth`` and ``<root>/archive`` for ``n_repos`` synthetic repositories."""
    root = Path(root)
    gt_root, archive_root = root / "groundtruth", root / "archive"
    repos = synthetic_repos(n_repos)
    for repo in repos:
        repo_dir = write_groundtruth_set(gt_root, synthetic_groundtruth_set(repo, seed))
        write_archive(archive_root, repo, synthetic_archive(repo, seed))
        if with_inputs:
            (repo_dir / "inputs").mkdir(exist_ok=True)
            for source in SOURCES:
                (repo_dir / "inputs" / f"{source.value}.txt").write_text(
                    archive_input_text(archive_root, repo, source), encoding="utf-8")
    return gt_root, archive_root, repos
