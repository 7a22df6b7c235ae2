"""Tokenization shared by documents and queries.

Text must already be English (or translated); no language detection,
stemming or stopword removal happens here.
"""

from __future__ import annotations

import re

MIN_TOKEN_LEN = 2

# runs of Unicode letters/digits; underscore is a separator
_TOKEN_RE = re.compile(r"[^\W_]+")


def tokenize(text: str, min_len: int = MIN_TOKEN_LEN) -> list[str]:
    """Lowercase ``text`` and split it on every non-alphanumeric character.

    >>> tokenize("BM25-based re-ranking (2020)")
    ['bm25', 'based', 're', 'ranking', '2020']
    """
    if not text:
        return []
    return [t for t in _TOKEN_RE.findall(text.lower()) if len(t) >= min_len]


def doc_text(doc) -> str:
    """Title and abstract joined by one space; empty parts are skipped."""
    return " ".join(part for part in (doc.title, doc.abstract) if part)
