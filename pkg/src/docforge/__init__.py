"""Structured, per-type software documentation mined from five artifact streams."""

from .model import (
    ArtifactRecord,
    DocMetadata,
    DocumentationSource,
    DocumentationType,
    EvalScores,
    RepositoryRef,
    Scope,
    SourceBundle,
    StructuredDoc,
)
from .schema import canonical_text, validate_schema

__version__ = "0.1.0"

__all__ = [
    "ArtifactRecord",
    "DocMetadata",
    "DocumentationSource",
    "DocumentationType",
    "EvalScores",
    "RepositoryRef",
    "Scope",
    "SourceBundle",
    "StructuredDoc",
    "canonical_text",
    "validate_schema",
]
