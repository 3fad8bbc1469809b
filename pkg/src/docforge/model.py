"""Core value types: the type/source taxonomy, artifact records and structured docs."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from functools import cached_property
from typing import Any, Mapping

SCHEMA_VERSION = 1


class DocumentationType(str, Enum):
    API = "api"
    ERROR_BUG = "error"
    FILE = "file"
    LICENSE = "license"
    PROJECT = "project"

    @classmethod
    def parse(cls, value: str) -> "DocumentationType":
        try:
            return cls(value)
        except ValueError:
            valid = ", ".join(t.value for t in cls)
            raise ValueError(f"unknown documentation type {value!r}; expected one of: {valid}") from None

    @property
    def label(self) -> str:
        return _TYPE_LABELS[self]

    def __str__(self) -> str:
        return self.value


class DocumentationSource(str, Enum):
    PULL_REQUESTS = "pull_requests"
    ISSUES = "issues"
    COMMITS = "commits"
    COMMENTS = "comments"
    TEXTUAL_FILES = "textual_files"

    @classmethod
    def parse(cls, value: str) -> "DocumentationSource":
        try:
            return cls(value)
        except ValueError:
            valid = ", ".join(s.value for s in cls)
            raise ValueError(f"unknown documentation source {value!r}; expected one of: {valid}") from None

    @property
    def label(self) -> str:
        return _SOURCE_LABELS[self]

    def __str__(self) -> str:
        return self.value


_TYPE_LABELS = {
    DocumentationType.API: "API-related",
    DocumentationType.ERROR_BUG: "Error-related",
    DocumentationType.FILE: "File-related",
    DocumentationType.LICENSE: "License-related",
    DocumentationType.PROJECT: "Project-related",
}

_SOURCE_LABELS = {
    DocumentationSource.PULL_REQUESTS: "Pull-Requests",
    DocumentationSource.ISSUES: "Issues",
    DocumentationSource.COMMITS: "Commits",
    DocumentationSource.COMMENTS: "Comments",
    DocumentationSource.TEXTUAL_FILES: "TextualFiles",
}

DOC_TYPES: tuple[DocumentationType, ...] = tuple(DocumentationType)
SOURCES: tuple[DocumentationSource, ...] = tuple(DocumentationSource)


def fingerprint(text: str) -> str:
    """Stable 64-bit digest of ``text`` as 16 hex characters."""
    return hashlib.blake2b(text.encode("utf-8"), digest_size=8).hexdigest()


def format_timestamp(dt: datetime) -> str:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    dt = dt.astimezone(timezone.utc)
    if dt.microsecond:
        return dt.strftime("%Y-%m-%dT%H:%M:%S.%fZ")
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_timestamp(value: str) -> datetime:
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


@dataclass(frozen=True)
class RepositoryRef:
    owner: str
    name: str

    def __post_init__(self):
        for part, value in (("owner", self.owner), ("name", self.name)):
            if not value:
                raise ValueError(f"repository {part} must be non-empty")
            if any(ch.isspace() or ch in "/\\" for ch in value):
                raise ValueError(f"repository {part} {value!r} contains whitespace or a path separator")

    @classmethod
    def parse(cls, text: str) -> "RepositoryRef":
        owner, sep, name = text.strip().partition("/")
        if not sep:
            raise ValueError(f"expected 'owner/name', got {text!r}")
        return cls(owner, name)

    @classmethod
    def from_slug(cls, slug: str) -> "RepositoryRef":
        owner, sep, name = slug.partition("__")
        if not sep:
            raise ValueError(f"expected '<owner>__<name>' directory name, got {slug!r}")
        return cls(owner, name)

    @property
    def slug(self) -> str:
        """Filesystem-safe form used in cache and output layouts."""
        return f"{self.owner}__{self.name}"

    def __str__(self) -> str:
        return f"{self.owner}/{self.name}"


@dataclass(frozen=True)
class ArtifactRecord:
    source: DocumentationSource
    id: str
    body: str
    title: str | None = None
    created_at: datetime | None = None
    url: str | None = None

    def __post_init__(self):
        if not self.id:
            raise ValueError("artifact record id must be non-empty")
        if not self.body and not self.title:
            raise ValueError(f"record {self.id!r} has neither body nor title")
        if self.created_at is not None and self.created_at.tzinfo is None:
            object.__setattr__(self, "created_at", self.created_at.replace(tzinfo=timezone.utc))

    def sort_key(self) -> tuple:
        # undated records (files, comments) sort before dated ones, then by id
        ts = self.created_at.timestamp() if self.created_at is not None else float("-inf")
        return (ts, self.id)

    def to_json(self) -> dict[str, Any]:
        return {
            "source": self.source.value,
            "id": self.id,
            "title": self.title,
            "body": self.body,
            "created_at": format_timestamp(self.created_at) if self.created_at else None,
            "url": self.url,
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "ArtifactRecord":
        created = data.get("created_at")
        return cls(
            source=DocumentationSource.parse(data["source"]),
            id=data["id"],
            title=data.get("title"),
            body=data.get("body") or "",
            created_at=parse_timestamp(created) if created else None,
            url=data.get("url"),
        )


def render_record(record: ArtifactRecord) -> str:
    header = f"### {record.id}"
    if record.title:
        header += " " + " ".join(record.title.split())
    return f"{header}\n{record.body}\n\n"


@dataclass(frozen=True)
class SourceBundle:
    """All records of one artifact stream for one repository, in canonical order."""

    repo: RepositoryRef
    source: DocumentationSource
    records: tuple[ArtifactRecord, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        keys = [r.sort_key() for r in self.records]
        if keys != sorted(keys):
            raise ValueError("bundle records must be ordered by (created_at, id)")

    @cached_property
    def extracted_text(self) -> str:
        return "".join(render_record(r) for r in self.records)


@dataclass(frozen=True)
class Scope:
    """Either one documentation source (level-1 / intermediate) or all of them (final)."""

    source: DocumentationSource | None = None

    @classmethod
    def single(cls, source: DocumentationSource) -> "Scope":
        return cls(source)

    @classmethod
    def all_sources(cls) -> "Scope":
        return cls(None)

    @property
    def is_final(self) -> bool:
        return self.source is None

    def to_json(self) -> Any:
        return "all_sources" if self.source is None else {"single_source": self.source.value}

    @classmethod
    def from_json(cls, data: Any) -> "Scope":
        if data == "all_sources":
            return cls(None)
        if isinstance(data, Mapping) and "single_source" in data:
            return cls(DocumentationSource.parse(data["single_source"]))
        raise ValueError(f"unrecognised scope {data!r}")

    def __str__(self) -> str:
        return "all_sources" if self.source is None else self.source.value


EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


@dataclass(frozen=True)
class DocMetadata:
    generated_at: datetime = EPOCH
    model_id: str = "groundtruth"
    prompt_fingerprint: str = "0" * 16
    truncated: bool = False

    def to_json(self) -> dict[str, Any]:
        return {
            "generated_at": format_timestamp(self.generated_at),
            "model_id": self.model_id,
            "prompt_fingerprint": self.prompt_fingerprint,
            "truncated": self.truncated,
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any] | None) -> "DocMetadata":
        if not data:
            return cls()
        return cls(
            generated_at=parse_timestamp(data["generated_at"]) if data.get("generated_at") else EPOCH,
            model_id=data.get("model_id", "groundtruth"),
            prompt_fingerprint=data.get("prompt_fingerprint", "0" * 16),
            truncated=bool(data.get("truncated", False)),
        )


@dataclass(frozen=True)
class StructuredDoc:
    doc_type: DocumentationType
    scope: Scope
    entries: tuple[dict, ...] = ()
    metadata: DocMetadata = field(default_factory=DocMetadata)

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(copy.deepcopy(list(self.entries))))

    def payload(self) -> dict[str, Any]:
        """The part of the document a model is asked to produce."""
        return {
            "doc_type": self.doc_type.value,
            "scope": self.scope.to_json(),
            "entries": [copy.deepcopy(e) for e in self.entries],
        }

    def payload_json(self) -> str:
        """Single-line JSON of :meth:`payload`, as embedded in prompts."""
        return json.dumps(self.payload(), ensure_ascii=False, separators=(", ", ": "))

    def to_json(self) -> dict[str, Any]:
        data = {"schema_version": SCHEMA_VERSION}
        data.update(self.payload())
        data["metadata"] = self.metadata.to_json()
        return data

    def dumps(self) -> str:
        return json.dumps(self.to_json(), ensure_ascii=False, indent=2) + "\n"

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "StructuredDoc":
        version = data.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {version!r}")
        entries = data.get("entries")
        if not isinstance(entries, list):
            raise ValueError("'entries' must be a list")
        return cls(
            doc_type=DocumentationType.parse(data["doc_type"]),
            scope=Scope.from_json(data["scope"]),
            entries=tuple(entries),
            metadata=DocMetadata.from_json(data.get("metadata")),
        )

    @classmethod
    def loads(cls, text: str) -> "StructuredDoc":
        return cls.from_json(json.loads(text))


@dataclass(frozen=True)
class EvalScores:
    bleu4: float = 0.0
    rouge_p: float = 0.0
    rouge_r: float = 0.0
    rouge_f: float = 0.0

    def __post_init__(self):
        for name in ("bleu4", "rouge_p", "rouge_r", "rouge_f"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} outside [0, 1]")
