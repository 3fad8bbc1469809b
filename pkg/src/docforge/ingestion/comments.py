"""String-literal aware comment lexer."""

from __future__ import annotations

from .config import CommentGrammar


class CommentList(list):
    """Comment texts in document order, plus any lexer warnings."""

    def __init__(self, comments=(), warnings=()):
        super().__init__(comments)
        self.warnings: list[str] = list(warnings)


def _match(text: str, i: int, candidates) -> str | None:
    for c in candidates:
        if text.startswith(c, i):
            return c
    return None


def _clean_block(content: str, gutter: str | None) -> str:
    lines = []
    for line in content.split("\n"):
        line = line.strip()
        if gutter and line.startswith(gutter):
            line = line.lstrip(gutter).strip()
        lines.append(line)
    while lines and not lines[0]:
        lines.pop(0)
    while lines and not lines[-1]:
        lines.pop()
    return "\n".join(lines)


def extract_comments(file_body: str, grammar: CommentGrammar) -> CommentList:
    """Return the comments of ``file_body`` in document order.

    Markers inside string literals are ignored. Line comments on consecutive
    lines with nothing but whitespace between them merge into one comment.
    Block comments are returned without their delimiters; an unterminated
    block runs to the end of the file and adds a warning.
    """
    opens = sorted(grammar.block_pairs, key=lambda p: -len(p[0]))
    line_markers = sorted(grammar.line_markers, key=len, reverse=True)
    quotes = sorted(grammar.string_delimiters, key=len, reverse=True)

    comments: list[str] = []
    warnings: list[str] = []
    pending: list[str] = []  # lines of the current line-comment run
    pending_line = -2
    dirty = False  # code seen since the last comment
    line_no = 0
    i, n = 0, len(file_body)

    def flush():
        nonlocal pending
        text = "\n".join(pending).strip()
        if text:
            comments.append(text)
        pending = []

    while i < n:
        ch = file_body[i]
        if ch == "\n":
            line_no += 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            continue

        pair = next(((o, c) for o, c in opens if file_body.startswith(o, i)), None)
        if pair is not None:
            open_, close = pair
            start = i + len(open_)
            end = file_body.find(close, start)
            if end < 0:
                content = file_body[start:]
                warnings.append(f"unterminated block comment {open_!r} at line {line_no + 1}")
                i = n
            else:
                content = file_body[start:end]
                i = end + len(close)
            flush()
            line_no += content.count("\n")
            cleaned = _clean_block(content, grammar.block_gutter)
            if cleaned:
                comments.append(cleaned)
            dirty = False
            pending_line = -2
            continue

        marker = _match(file_body, i, line_markers)
        if marker is not None:
            eol = file_body.find("\n", i)
            if eol < 0:
                eol = n
            text = file_body[i + len(marker):eol].strip()
            if not (pending and pending_line == line_no - 1 and not dirty):
                flush()
            pending.append(text)
            pending_line = line_no
            dirty = False
            i = eol
            continue

        quote = _match(file_body, i, quotes)
        if quote is not None:
            j = i + len(quote)
            while j < n:
                c = file_body[j]
                if c == grammar.escape_char:
                    j += 2
                    continue
                if c == "\n" and len(quote) == 1 and quote not in grammar.multiline_strings:
                    break  # unterminated single-line string ends at the line break
                if file_body.startswith(quote, j):
                    j += len(quote)
                    break
                j += 1
            line_no += file_body.count("\n", i, min(j, n))
            i = min(j, n)
            dirty = True
            continue

        dirty = True
        i += 1

    flush()
    return CommentList(comments, warnings)
