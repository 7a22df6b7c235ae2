"""Okapi BM25 over title + abstract, plus the reversed min-max relevance cost."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .textprep import doc_text, tokenize

K1 = 1.5
B = 0.75
EPSILON = 0.25

INDEX_FORMAT = "fairrank-bm25"
INDEX_VERSION = 1


@dataclass(frozen=True)
class Bm25Index:
    postings: Mapping[str, tuple[tuple[str, int], ...]]
    doc_len: Mapping[str, int]
    avg_doc_len: float
    doc_count: int
    idf: Mapping[str, float]
    k1: float = K1
    b: float = B
    epsilon: float = EPSILON
    # doc_id -> {term: tf}; derived from postings, kept for O(|query|) scoring
    doc_tf: Mapping[str, Mapping[str, int]] = None

    def __contains__(self, doc_id) -> bool:
        return doc_id in self.doc_len

    def score(self, query: Sequence[str], doc_id: str) -> float:
        return score(self, query, doc_id)


def compute_idf(doc_freq: Mapping[str, int], doc_count: int,
                epsilon: float = EPSILON) -> dict[str, float]:
    """Okapi idf ``ln((N - df + 0.5) / (df + 0.5))`` with a non-negativity floor.

    Terms whose idf comes out negative get ``epsilon`` times the mean of the
    strictly positive idf values instead (zero if there are none).
    """
    raw = {t: math.log(doc_count - df + 0.5) - math.log(df + 0.5)
           for t, df in doc_freq.items()}
    positive = [v for v in raw.values() if v > 0]
    floor = epsilon * (math.fsum(positive) / len(positive)) if positive else 0.0
    return {t: (v if v >= 0 else floor) for t, v in raw.items()}


def index_from_term_freqs(doc_tf: Mapping[str, Mapping[str, int]], *, k1: float = K1,
                          b: float = B, epsilon: float = EPSILON) -> Bm25Index:
    if not doc_tf:
        raise ValueError("cannot build a BM25 index over an empty corpus")
    doc_len = {d: sum(tf.values()) for d, tf in doc_tf.items()}
    total = sum(doc_len.values())
    if total == 0:
        raise ValueError("cannot build a BM25 index: no document has any tokens")
    postings: dict[str, list[tuple[str, int]]] = {}
    for d, tf in doc_tf.items():
        for term, n in tf.items():
            postings.setdefault(term, []).append((d, n))
    doc_freq = {t: len(p) for t, p in postings.items()}
    return Bm25Index(
        postings={t: tuple(p) for t, p in postings.items()},
        doc_len=doc_len,
        avg_doc_len=total / len(doc_len),
        doc_count=len(doc_len),
        idf=compute_idf(doc_freq, len(doc_len), epsilon),
        k1=k1,
        b=b,
        epsilon=epsilon,
        doc_tf={d: dict(tf) for d, tf in doc_tf.items()},
    )


def build_index(corpus: Mapping, *, k1: float = K1, b: float = B,
                epsilon: float = EPSILON) -> Bm25Index:
    """Index every document of ``corpus`` (doc_id -> PaperDoc) by its title and abstract."""
    doc_tf = {doc_id: Counter(tokenize(doc_text(doc))) for doc_id, doc in corpus.items()}
    return index_from_term_freqs(doc_tf, k1=k1, b=b, epsilon=epsilon)


def score(index: Bm25Index, query: Sequence[str], doc_id: str) -> float:
    """Raw BM25 score; repeated query terms contribute once per occurrence."""
    try:
        tf = index.doc_tf[doc_id]
    except KeyError:
        raise KeyError(f"document {doc_id!r} is not in the index") from None
    norm = index.k1 * (1.0 - index.b + index.b * index.doc_len[doc_id] / index.avg_doc_len)
    total = 0.0
    for term in query:
        n = tf.get(term, 0)
        if n:
            total += index.idf[term] * n * (index.k1 + 1.0) / (n + norm)
    return total


def score_many(index: Bm25Index, query: Sequence[str], doc_ids: Iterable[str]) -> dict[str, float]:
    return {d: score(index, query, d) for d in doc_ids}


def rank_by_score(index: Bm25Index, query: Sequence[str],
                  candidates: Sequence[str]) -> list[tuple[str, float]]:
    """Candidates by descending score, ties by ascending doc id."""
    if not candidates:
        raise ValueError("no candidates to rank")
    scores = score_many(index, query, candidates)
    return sorted(scores.items(), key=lambda item: (-item[1], item[0]))


def reversed_minmax(scores: Mapping[str, float]) -> dict[str, float]:
    """Map raw scores to ``1 - (s - min) / (max - min)``; all zeros if the scores are equal."""
    if not scores:
        raise ValueError("empty pool")
    lo = min(scores.values())
    hi = max(scores.values())
    if hi == lo:
        return {d: 0.0 for d in scores}
    span = hi - lo
    return {d: 1.0 - (s - lo) / span for d, s in scores.items()}


def relevance_cost(index: Bm25Index, query: Sequence[str], doc_id: str,
                   pool: Sequence[str]) -> float:
    """Relevance cost of ``doc_id`` within ``pool``: 0 for the best score, 1 for the worst."""
    if doc_id not in pool:
        raise ValueError(f"document {doc_id!r} is not in the pool")
    return reversed_minmax(score_many(index, query, pool))[doc_id]


def save_index(index: Bm25Index, path) -> None:
    """Write the index as JSON lines: a header object, then one ``{doc, tf}`` line per document.

    Only term frequencies and parameters are stored; idf and lengths are
    recomputed on load, so a saved index always agrees with a fresh build.
    """
    with open(path, "w", encoding="utf-8") as fh:
        header = {"format": INDEX_FORMAT, "version": INDEX_VERSION, "k1": index.k1,
                  "b": index.b, "epsilon": index.epsilon, "doc_count": index.doc_count,
                  "term_count": len(index.idf), "avg_doc_len": index.avg_doc_len}
        fh.write(json.dumps(header) + "\n")
        for d, tf in index.doc_tf.items():
            fh.write(json.dumps({"doc": d, "tf": dict(sorted(tf.items()))},
                                ensure_ascii=False) + "\n")


def load_index(path, *, k1: Optional[float] = None, b: Optional[float] = None,
               epsilon: Optional[float] = None) -> Bm25Index:
    with open(path, encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if header.get("format") != INDEX_FORMAT or header.get("version") != INDEX_VERSION:
            raise ValueError(f"{path}: not a version {INDEX_VERSION} {INDEX_FORMAT} file")
        doc_tf = {}
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                doc_tf[obj["doc"]] = obj["tf"]
    return index_from_term_freqs(
        doc_tf,
        k1=header["k1"] if k1 is None else k1,
        b=header["b"] if b is None else b,
        epsilon=header["epsilon"] if epsilon is None else epsilon,
    )


def index_summary(index: Bm25Index) -> dict:
    return {"documents": index.doc_count, "terms": len(index.idf),
            "avg_doc_len": index.avg_doc_len}
