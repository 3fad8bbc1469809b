from __future__ import annotations

from typing import Iterable

from ..model import ArtifactRecord, DocumentationSource, RepositoryRef, SourceBundle


def build_bundle(repo: RepositoryRef, source: DocumentationSource,
                 records: Iterable[ArtifactRecord]) -> SourceBundle:
    """Sort ``records`` into canonical order and wrap them as a bundle.

    Raises ValueError naming the first record whose source differs.
    """
    records = list(records)
    for record in records:
        if record.source != source:
            raise ValueError(
                f"record {record.id!r} has source {record.source.value!r}, expected {source.value!r}"
            )
    return SourceBundle(repo, source, tuple(sorted(records, key=ArtifactRecord.sort_key)))
