"""Mining the five artifact streams of a repository into cached source bundles."""

from .bundle import build_bundle
from .cache import cache_load, cache_path, cache_store
from .comments import CommentList, extract_comments
from .config import (
    C_FAMILY,
    DOCSTRING_FAMILY,
    GRAMMARS,
    SCRIPT_FAMILY,
    CommentGrammar,
    IngestionConfig,
)
from .fetch import ArchiveClient, GitHubClient, RateGovernor, fetch_artifacts

__all__ = [
    "ArchiveClient",
    "C_FAMILY",
    "CommentGrammar",
    "CommentList",
    "DOCSTRING_FAMILY",
    "GRAMMARS",
    "GitHubClient",
    "IngestionConfig",
    "RateGovernor",
    "SCRIPT_FAMILY",
    "build_bundle",
    "cache_load",
    "cache_path",
    "cache_store",
    "extract_comments",
    "fetch_artifacts",
]
