"""Fairness-aware greedy re-ranking.

The cost of appending document ``d`` to the partial ranking ``R`` is::

    C(d) = w_r * F(d) + w_g * KL(p_gender(R + d) || p_gender(D'))
                      + w_c * KL(p_country(R + d) || p_country(D'))

where ``F`` is the reversed min-max BM25 score over the reference pool
``D'`` and ``p_v`` are author-pooled group distributions.  ``rerank``
repeatedly appends the cheapest remaining candidate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .bm25 import Bm25Index, rank_by_score, reversed_minmax, score_many
from .corpus import AuthorRecord, PaperDoc, QueryRecord
from .groups import COUNTRY, GENDER, KL_ALPHA, count_probs, doc_group_counts, smoothed_kl
from .textprep import tokenize

DEFAULT_K = 100


@dataclass(frozen=True)
class WeightVector:
    w_r: float
    w_g: float
    w_c: float

    def __post_init__(self):
        if min(self.w_r, self.w_g, self.w_c) < 0:
            raise ValueError(f"weights must be nonnegative, got {self.as_tuple()}")
        if abs(self.w_r + self.w_g + self.w_c - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {self.as_tuple()}")

    @classmethod
    def parse(cls, text: str) -> "WeightVector":
        """Parse ``"r,g,c"``."""
        parts = [p for p in text.replace(" ", "").split(",") if p]
        if len(parts) != 3:
            raise ValueError(f"expected three comma-separated weights, got {text!r}")
        return cls(*(float(p) for p in parts))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.w_r, self.w_g, self.w_c)

    @property
    def label(self) -> str:
        return "w={:g},{:g},{:g}".format(*self.as_tuple())


def simplex_grid(step: float = 0.25) -> list[WeightVector]:
    """All weight vectors on the simplex lattice with the given step, ``w_r`` descending."""
    n = round(1 / step)
    if n < 1 or abs(n * step - 1.0) > 1e-9:
        raise ValueError(f"step must divide 1 evenly, got {step}")
    return [WeightVector(i / n, j / n, (n - i - j) / n)
            for i in range(n, -1, -1) for j in range(n - i, -1, -1)]


@dataclass(frozen=True)
class CostBreakdown:
    relevance_term: float
    kl_gender_term: float
    kl_country_term: float
    total: float

    def as_list(self) -> list[float]:
        return [self.relevance_term, self.kl_gender_term, self.kl_country_term, self.total]


@dataclass(frozen=True)
class RankedList:
    query_id: str
    entries: tuple[tuple[str, Optional[CostBreakdown]], ...]
    weights: Optional[WeightVector] = None  # None for baselines
    seed: Optional[int] = None

    @property
    def doc_ids(self) -> list[str]:
        return [d for d, _ in self.entries]

    def __len__(self):
        return len(self.entries)

    def to_json_obj(self) -> dict:
        costs = [c.as_list() if c is not None else None for _, c in self.entries]
        return {
            "qid": self.query_id,
            "weights": None if self.weights is None else list(self.weights.as_tuple()),
            "seed": self.seed,
            "ranking": self.doc_ids,
            "costs": costs if any(c is not None for c in costs) else None,
        }


class RankingContext:
    """Index, corpus and imputed author table shared by every query.

    Per-document group counts are cached on first use; the cache only grows,
    so sharing one context between threads is safe.
    """

    def __init__(self, index: Bm25Index, corpus: Mapping[str, PaperDoc],
                 authors: Mapping[str, AuthorRecord], *, alpha: float = KL_ALPHA):
        self.index = index
        self.corpus = corpus
        self.authors = authors
        self.alpha = alpha
        self._counts: dict[tuple[str, str], tuple[int, ...]] = {}

    def doc_counts(self, doc_id: str, variable) -> tuple[int, ...]:
        key = (variable.name, doc_id)
        counts = self._counts.get(key)
        if counts is None:
            counts = tuple(doc_group_counts(self.corpus[doc_id], self.authors, variable))
            self._counts[key] = counts
        return counts

    def set_counts(self, doc_ids: Sequence[str], variable) -> list[int]:
        totals = [0] * len(variable.values)
        for d in doc_ids:
            for j, n in enumerate(self.doc_counts(d, variable)):
                totals[j] += n
        return totals


def candidate_pool(index: Bm25Index, query: Sequence[str], k: int = DEFAULT_K,
                   restrict_to: Optional[Sequence[str]] = None) -> list[str]:
    """Top-``k`` documents by BM25, from ``restrict_to`` or the whole index."""
    if k < 1:
        raise ValueError(f"pool size must be at least 1, got {k}")
    if restrict_to is None:
        candidates = list(index.doc_len)
    else:
        candidates = list(dict.fromkeys(restrict_to))
        if not candidates:
            raise ValueError("empty candidate restriction")
    return [d for d, _ in rank_by_score(index, query, candidates)[:k]]


class _CostModel:
    """Everything about one query's reference pool that stays fixed during the greedy loop."""

    def __init__(self, context: RankingContext, query: Sequence[str], reference: Sequence[str],
                 scores: Optional[Mapping[str, float]] = None):
        if not reference:
            raise ValueError("empty reference pool")
        self.context = context
        if scores is None:
            raw = score_many(context.index, query, reference)
        else:
            raw = {d: float(scores[d]) for d in reference}
        self.relevance = reversed_minmax(raw)
        self.ref_probs = {
            v.name: count_probs(context.set_counts(reference, v)) for v in (GENDER, COUNTRY)
        }

    def breakdown(self, doc: str, w: WeightVector,
                  current_counts: Mapping[str, Sequence[int]]) -> CostBreakdown:
        alpha = self.context.alpha
        kl = {}
        for v in (GENDER, COUNTRY):
            doc_counts = self.context.doc_counts(doc, v)
            merged = [a + b for a, b in zip(current_counts[v.name], doc_counts)]
            kl[v.name] = smoothed_kl(count_probs(merged), self.ref_probs[v.name], alpha)
        rel = self.relevance[doc]
        total = w.w_r * rel + w.w_g * kl["gender"] + w.w_c * kl["country"]
        return CostBreakdown(rel, kl["gender"], kl["country"], total)


def cost(doc: str, w: WeightVector, current, pool: Sequence[str], query: Sequence[str],
         context: RankingContext, *, scores: Optional[Mapping[str, float]] = None
         ) -> CostBreakdown:
    """Cost of appending ``doc`` to the ranking ``current`` (a RankedList or id list).

    ``pool`` is the reference set used both for score normalization and as the
    target group distribution.
    """
    current_ids = current.doc_ids if isinstance(current, RankedList) else list(current)
    if doc in current_ids:
        raise ValueError(f"document {doc!r} is already ranked")
    if doc not in pool:
        raise ValueError(f"document {doc!r} is not in the pool")
    model = _CostModel(context, query, pool, scores)
    counts = {v.name: context.set_counts(current_ids, v) for v in (GENDER, COUNTRY)}
    return model.breakdown(doc, w, counts)


def rerank(pool: Sequence[str], w: WeightVector, l: int, query: Sequence[str],
           context: RankingContext, *, reference: Optional[Sequence[str]] = None,
           scores: Optional[Mapping[str, float]] = None, query_id: str = "",
           seed: Optional[int] = None) -> RankedList:
    """Greedy fairness-aware ranking of length ``l`` drawn from ``pool``.

    Each step appends the remaining document of minimal cost, ties going to
    the smaller doc id.  ``reference`` (default: ``pool``) is the set whose
    scores and group distribution define the costs; ``scores`` replaces the
    BM25 scores of the reference documents when given.
    """
    working = sorted(set(pool))
    if l < 1:
        raise ValueError(f"ranking length must be at least 1, got {l}")
    if l > len(working):
        raise ValueError(f"requested {l} documents from a pool of {len(working)}")
    reference = working if reference is None else list(dict.fromkeys(reference))
    outside = set(working) - set(reference)
    if outside:
        raise ValueError(f"pool documents missing from the reference set: {sorted(outside)}")
    model = _CostModel(context, query, reference, scores)
    counts = {v.name: [0] * len(v.values) for v in (GENDER, COUNTRY)}
    entries = []
    for _ in range(l):
        best, best_cost = None, None
        for d in working:
            c = model.breakdown(d, w, counts)
            if best_cost is None or c.total < best_cost.total:
                best, best_cost = d, c
        entries.append((best, best_cost))
        working.remove(best)
        for v in (GENDER, COUNTRY):
            for j, n in enumerate(context.doc_counts(best, v)):
                counts[v.name][j] += n
    return RankedList(query_id, tuple(entries), w, seed)


def query_pool(query: QueryRecord, context: RankingContext, *, task: str = "rerank",
               k: int = DEFAULT_K) -> tuple[list[str], list[str]]:
    """Query tokens and candidate pool for the retrieval or re-ranking task.

    Re-ranking uses the query's own candidate list (ids unknown to the corpus
    dropped); retrieval takes the top ``k`` of the whole corpus.
    """
    tokens = tokenize(query.query_text)
    if task == "rerank":
        restrict = query.known_doc_ids
        if not restrict:
            raise ValueError(f"query {query.query_id!r} has no known candidate documents")
        pool = candidate_pool(context.index, tokens, len(restrict), restrict)
    elif task == "retrieve":
        pool = candidate_pool(context.index, tokens, k)
    else:
        raise ValueError(f"unknown task {task!r}")
    return tokens, pool


def run_query(query: QueryRecord, context: RankingContext, w: WeightVector, *,
              task: str = "rerank", k: int = DEFAULT_K, l: Optional[int] = None,
              seed: Optional[int] = None) -> RankedList:
    tokens, pool = query_pool(query, context, task=task, k=k)
    return rerank(pool, w, len(pool) if l is None else l, tokens, context,
                  query_id=query.query_id, seed=seed)

