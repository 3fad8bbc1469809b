"""On-disk bundle cache: one JSON-lines file per (repository, source)."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

from ..errors import CacheCorruptError
from ..model import ArtifactRecord, DocumentationSource, RepositoryRef, SourceBundle


def cache_path(cache_dir: str | Path, repo: RepositoryRef, source: DocumentationSource) -> Path:
    return Path(cache_dir) / repo.slug / f"{source.value}.jsonl"


def _cache_dir(cfg) -> Path:
    return Path(getattr(cfg, "cache_dir", cfg))


def cache_store(bundle: SourceBundle, cfg) -> Path:
    """Atomically write ``bundle``; ``cfg`` is an IngestionConfig or a cache directory."""
    path = cache_path(_cache_dir(cfg), bundle.repo, bundle.source)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = "".join(
        json.dumps(r.to_json(), ensure_ascii=False, sort_keys=True) + "\n" for r in bundle.records
    )
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(lines)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return path


def cache_load(repo: RepositoryRef, source: DocumentationSource, cfg) -> SourceBundle | None:
    """Return the cached bundle, or None when nothing has been stored for the key."""
    path = cache_path(_cache_dir(cfg), repo, source)
    if not path.is_file():
        return None
    records = []
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = ArtifactRecord.from_json(json.loads(line))
            except (ValueError, KeyError, TypeError) as exc:
                raise CacheCorruptError(path, f"line {line_no}: {exc}") from exc
            if record.source != source:
                raise CacheCorruptError(path, f"line {line_no}: record source {record.source.value!r}")
            records.append(record)
    try:
        return SourceBundle(repo, source, tuple(records))
    except ValueError as exc:
        raise CacheCorruptError(path, str(exc)) from exc
