"""Tokenizer, sentence-level BLEU-4 and ROUGE-L."""

from __future__ import annotations

import math
import unicodedata
from collections import Counter
from dataclasses import dataclass

# never meaningful in flattened docs; removed wherever they occur
_ALWAYS_DROP = str.maketrans("", "", '{}[]"')
# kept when attached to a word, dropped when they stand alone
_STANDALONE_DROP = frozenset(":,")


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace and peel punctuation off fragment edges.

    >>> tokenize("The API, returns JSON.")
    ['the', 'api', ',', 'returns', 'json', '.']
    """
    tokens: list[str] = []
    for fragment in text.lower().split():
        fragment = fragment.translate(_ALWAYS_DROP)
        if not fragment or set(fragment) <= _STANDALONE_DROP:
            continue
        i, j = 0, len(fragment)
        while i < j and _is_punct(fragment[i]):
            i += 1
        while j > i and _is_punct(fragment[j - 1]):
            j -= 1
        tokens.extend(fragment[:i])
        if i < j:
            tokens.append(fragment[i:j])
        tokens.extend(fragment[j:])
    return tokens


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu4(hypothesis: list[str], reference: list[str]) -> float:
    """Sentence BLEU with add-one smoothing on every n-gram precision.

    Orders run 1..4, or 1..len(hypothesis) for shorter hypotheses. An empty
    hypothesis scores 0.
    """
    c, r = len(hypothesis), len(reference)
    if c == 0:
        return 0.0
    max_n = min(4, c)
    log_precision = 0.0
    for n in range(1, max_n + 1):
        hyp_counts = _ngrams(hypothesis, n)
        ref_counts = _ngrams(reference, n)
        matched = sum(min(count, ref_counts[g]) for g, count in hyp_counts.items())
        log_precision += math.log((matched + 1) / (c - n + 1 + 1))
    brevity = 1.0 if c >= r else math.exp(1 - r / c)
    return brevity * math.exp(log_precision / max_n)


def lcs_length(a: list[str], b: list[str]) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, 1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


@dataclass(frozen=True)
class RougeL:
    precision: float
    recall: float
    f1: float
    lcs: int


def rouge_l(hypothesis: list[str], reference: list[str]) -> RougeL:
    lcs = lcs_length(hypothesis, reference)
    p = lcs / len(hypothesis) if hypothesis else 0.0
    r = lcs / len(reference) if reference else 0.0
    f = 0.0 if p + r == 0 else 2 * p * r / (p + r)
    return RougeL(p, r, f, lcs)
