"""Recovering a JSON document from model output with prose around it."""

from __future__ import annotations

import json
from typing import Any

from .errors import ExtractionError

_CLOSERS = {"{": "}", "[": "]"}


def _matching_close(text: str, start: int) -> int | None:
    """Index of the bracket closing ``text[start]``, honouring JSON strings; None if unbalanced."""
    stack = [_CLOSERS[text[start]]]
    in_string = False
    i = start + 1
    n = len(text)
    while i < n:
        ch = text[i]
        if in_string:
            if ch == "\\":
                i += 2
                continue
            if ch == '"':
                in_string = False
        elif ch == '"':
            in_string = True
        elif ch in _CLOSERS:
            stack.append(_CLOSERS[ch])
        elif ch in "}]":
            if ch != stack.pop():
                return None
            if not stack:
                return i
        i += 1
    return None


def extract_json(raw) -> Any:
    """Return the leftmost balanced JSON object or array in ``raw`` that parses.

    ``raw`` is a RawCompletion or a plain string. Text that is valid JSON as a
    whole is returned as-is.
    """
    text = raw if isinstance(raw, str) else raw.text
    try:
        return json.loads(text)
    except (json.JSONDecodeError, RecursionError):
        pass
    candidates: list[tuple[int, int]] = []
    for start, ch in enumerate(text):
        if ch not in _CLOSERS:
            continue
        end = _matching_close(text, start)
        if end is None:
            continue
        try:
            return json.loads(text[start : end + 1])
        except (json.JSONDecodeError, RecursionError):
            candidates.append((start, end))
    raise ExtractionError(
        f"no parseable JSON object or array in {len(text)} chars of output "
        f"({len(candidates)} balanced candidate(s) failed to parse)",
        candidates,
    )
