from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

DEFAULT_API_BASE_URL = "https://api.github.com"
TOKEN_ENV = "DOCFORGE_API_TOKEN"

DEFAULT_TEXTUAL_EXTENSIONS = (".md", ".txt", ".rst")
DEFAULT_TEXTUAL_NAMES = ("README", "LICENSE", "CHANGELOG", "CONTRIBUTING")


@dataclass(frozen=True)
class CommentGrammar:
    """Lexical description of a comment syntax: line markers, block pairs, string quotes."""

    line_markers: tuple[str, ...] = ()
    block_pairs: tuple[tuple[str, str], ...] = ()
    string_delimiters: tuple[str, ...] = ()
    escape_char: str = "\\"
    # stripped from the start of each block line, e.g. the "*" gutter of /** ... */
    block_gutter: str | None = None
    # delimiters whose literals may span lines (JS template strings, Go raw strings)
    multiline_strings: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "line_markers", tuple(self.line_markers))
        object.__setattr__(self, "block_pairs", tuple(tuple(p) for p in self.block_pairs))
        object.__setattr__(self, "string_delimiters", tuple(self.string_delimiters))
        object.__setattr__(self, "multiline_strings", tuple(self.multiline_strings))
        stray = set(self.multiline_strings) - set(self.string_delimiters)
        if stray:
            raise ValueError(f"multiline string(s) {sorted(stray)} are not string delimiters")
        opens = [o for o, _ in self.block_pairs]
        for label, markers in (("line marker", self.line_markers),
                               ("string delimiter", self.string_delimiters),
                               ("block opener", opens)):
            if any(not m for m in markers):
                raise ValueError(f"empty {label}")
            for a in markers:
                for b in markers:
                    if a is not b and b.startswith(a):
                        raise ValueError(f"{label} {a!r} is a prefix of {b!r}")
        for open_, close in self.block_pairs:
            if not close:
                raise ValueError(f"block opener {open_!r} has an empty closer")


C_FAMILY = CommentGrammar(
    line_markers=("//",),
    block_pairs=(("/*", "*/"),),
    string_delimiters=('"', "'", "`"),
    block_gutter="*",
    multiline_strings=("`",),
)

SCRIPT_FAMILY = CommentGrammar(
    line_markers=("#",),
    string_delimiters=('"', "'"),
)

DOCSTRING_FAMILY = CommentGrammar(
    line_markers=("#",),
    block_pairs=(('"""', '"""'), ("'''", "'''")),
    string_delimiters=('"', "'"),
)

GRAMMARS = {"c": C_FAMILY, "script": SCRIPT_FAMILY, "docstring": DOCSTRING_FAMILY}

DEFAULT_COMMENT_LANGUAGES = {
    **{ext: "c" for ext in (".c", ".h", ".cc", ".cpp", ".hpp", ".cxx", ".java", ".js", ".jsx",
                            ".ts", ".tsx", ".go", ".rs", ".cs", ".swift", ".kt", ".scala",
                            ".dart", ".m")},
    **{ext: "script" for ext in (".sh", ".bash", ".rb", ".pl", ".r", ".yml", ".yaml", ".toml",
                                 ".cmake", ".dockerfile")},
    ".py": "docstring",
    ".pyi": "docstring",
}


@dataclass(frozen=True)
class IngestionConfig:
    cache_dir: Path = Path(".docforge-cache")
    api_base_url: str = DEFAULT_API_BASE_URL
    auth_token: str | None = field(default=None, repr=False)
    max_records_per_source: int = 300
    textual_extensions: tuple[str, ...] = DEFAULT_TEXTUAL_EXTENSIONS
    textual_names: tuple[str, ...] = DEFAULT_TEXTUAL_NAMES
    comment_languages: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_COMMENT_LANGUAGES))
    page_size: int = 100
    max_attempts: int = 5
    backoff_base: float = 1.0
    backoff_factor: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "cache_dir", Path(self.cache_dir))
        object.__setattr__(self, "textual_extensions", tuple(self.textual_extensions))
        if self.max_records_per_source < 1:
            raise ValueError("max_records_per_source must be >= 1")
        if not self.textual_extensions:
            raise ValueError("textual_extensions must be non-empty")
        if self.auth_token is None and os.environ.get(TOKEN_ENV):
            object.__setattr__(self, "auth_token", os.environ[TOKEN_ENV])

    def grammar_for(self, path: str) -> CommentGrammar | None:
        suffix = Path(path).suffix.lower()
        language = self.comment_languages.get(suffix)
        return GRAMMARS.get(language) if language else None

    def is_textual(self, path: str) -> bool:
        p = Path(path)
        if p.suffix.lower() in self.textual_extensions:
            return True
        return p.suffix == "" and p.name.upper() in self.textual_names
