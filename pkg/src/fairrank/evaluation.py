"""Utility / unfairness measurement, baselines and the weight-grid sweep.

Utility is NDCG@depth over binary judgments.  Unfairness is the smoothed KL
divergence between the exposure-weighted author-group distribution of a
ranking (position ``i`` weighted by ``gamma ** (i - 1)``) and the
author-pooled distribution of the candidate pool.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .bm25 import rank_by_score
from .corpus import QueryRecord
from .groups import (COUNTRY, GENDER, distribution_from_counts, get_variable, group_counts,
                     kl_divergence, pooled_distribution)
from .reranker import DEFAULT_K, RankedList, RankingContext, WeightVector, query_pool, rerank

log = logging.getLogger(__name__)

DEFAULT_DEPTH = 10
DEFAULT_GAMMA = 0.5

BASELINES = ("bm25", "random")


class UndefinedUtility(ValueError):
    """The query has no relevant document, so NDCG is undefined."""


@dataclass(frozen=True)
class EvalPoint:
    label: str
    weights: Optional[WeightVector]  # None for the baselines
    utility: float
    unfairness_gender: float
    unfairness_country: float
    n_queries: int = 0
    n_skipped: int = 0


@dataclass
class SweepResult:
    points: list[EvalPoint]
    skipped: list[tuple[str, str]] = field(default_factory=list)  # (qid, reason)

    def point(self, label: str) -> EvalPoint:
        for p in self.points:
            if p.label == label:
                return p
        raise KeyError(label)


def _ids(ranking) -> list[str]:
    return ranking.doc_ids if isinstance(ranking, RankedList) else list(ranking)


def utility(ranking: Union[RankedList, Sequence[str]], qrels: Union[QueryRecord, set],
            depth: int = DEFAULT_DEPTH) -> float:
    """NDCG@depth with gain 1 for relevant documents and discount ``1/log2(i+1)``."""
    if depth < 1:
        raise ValueError("depth must be positive")
    relevant = qrels.relevant if isinstance(qrels, QueryRecord) else set(qrels)
    if not relevant:
        raise UndefinedUtility("no relevant documents; NDCG is undefined")
    dcg = sum(1.0 / math.log2(i + 2)
              for i, d in enumerate(_ids(ranking)[:depth]) if d in relevant)
    idcg = sum(1.0 / math.log2(i + 2) for i in range(min(len(relevant), depth)))
    return dcg / idcg


def exposure_weights(n: int, gamma: float = DEFAULT_GAMMA) -> list[float]:
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    return [gamma ** i for i in range(n)]


def unfairness(ranking, pool: Sequence[str], variable, gamma: float,
               context: RankingContext) -> float:
    """KL of the exposure-weighted ranking distribution against the pool distribution."""
    ids = _ids(ranking)
    if not ids:
        raise ValueError("empty ranking")
    var = get_variable(variable)
    counts = group_counts(ids, context.corpus, context.authors, var,
                          weights=exposure_weights(len(ids), gamma))
    exposed = distribution_from_counts(counts, var)
    reference = pooled_distribution(pool, context.corpus, context.authors, var)
    return kl_divergence(exposed, reference, context.alpha)


def baseline_random(pool: Sequence[str], l: int, seed, query_id: str = "") -> RankedList:
    """Seeded uniform random ordering of ``pool``, cut to length ``l``.

    ``seed`` may be an int or a sequence of ints (fed to numpy's SeedSequence).
    """
    if l > len(pool):
        raise ValueError(f"requested {l} documents from a pool of {len(pool)}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(pool))[:l]
    return RankedList(query_id, tuple((pool[i], None) for i in order), None,
                      seed if isinstance(seed, int) else None)


def baseline_bm25(pool: Sequence[str], l: int, query: Sequence[str], context: RankingContext,
                  query_id: str = "") -> RankedList:
    if l > len(pool):
        raise ValueError(f"requested {l} documents from a pool of {len(pool)}")
    ranked = rank_by_score(context.index, query, pool)[:l]
    return RankedList(query_id, tuple((d, None) for d, _ in ranked))


def _evaluate_query(i: int, query: QueryRecord, grid: Sequence[WeightVector],
                    context: RankingContext, depth: int, gamma: float, seed: int, task: str,
                    k: int, l: Optional[int]) -> dict[str, tuple[float, float, float]]:
    if not query.relevant:
        raise UndefinedUtility("no relevant documents")
    tokens, pool = query_pool(query, context, task=task, k=k)
    n = len(pool) if l is None else l
    rankings = {w.label: rerank(pool, w, n, tokens, context, query_id=query.query_id, seed=seed)
                for w in grid}
    rankings["bm25"] = baseline_bm25(pool, n, tokens, context, query.query_id)
    rankings["random"] = baseline_random(pool, n, (seed, i), query.query_id)
    return {
        label: (utility(r, query, depth),
                unfairness(r, pool, GENDER, gamma, context),
                unfairness(r, pool, COUNTRY, gamma, context))
        for label, r in rankings.items()
    }


def sweep(grid: Sequence[WeightVector], queries: Sequence[QueryRecord], context: RankingContext,
          *, depth: int = DEFAULT_DEPTH, gamma: float = DEFAULT_GAMMA, seed: int = 0,
          task: str = "rerank", k: int = DEFAULT_K, l: Optional[int] = None,
          jobs: int = 1) -> SweepResult:
    """Mean utility and unfairness per grid point plus the bm25 and random baselines.

    A query is skipped (for every row alike) when it has no relevant document
    or any of its rankings cannot be evaluated; skips are listed in the result.
    """
    if not grid:
        raise ValueError("empty weight grid")
    labels = [w.label for w in grid]
    if len(set(labels)) != len(labels):
        raise ValueError("duplicate weight vectors in grid")

    def work(item):
        i, q = item
        try:
            return _evaluate_query(i, q, grid, context, depth, gamma, seed, task, k, l)
        except (ValueError, KeyError) as exc:
            return exc

    items = list(enumerate(queries))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(work, items))
    else:
        outcomes = [work(item) for item in items]

    per_query = []
    skipped = []
    for q, out in zip(queries, outcomes):
        if isinstance(out, Exception):
            reason = str(out.args[0]) if out.args else type(out).__name__
            skipped.append((q.query_id, reason))
            log.info("skipping query %s: %s", q.query_id, reason)
        else:
            per_query.append(out)

    points = []
    for label, w in [*zip(labels, grid), ("bm25", None), ("random", None)]:
        if per_query:
            means = [math.fsum(r[label][j] for r in per_query) / len(per_query) for j in range(3)]
        else:
            means = [math.nan] * 3
        points.append(EvalPoint(label, w, *means, n_queries=len(per_query),
                                n_skipped=len(skipped)))
    return SweepResult(points, skipped)


SWEEP_HEADER = ["label", "w_r", "w_g", "w_c", "utility", "unfairness_gender",
                "unfairness_country", "n_queries", "n_skipped"]


def write_sweep_csv(points: Sequence[EvalPoint], dest) -> None:
    """Write the sweep table to a path or an open text file."""
    if not hasattr(dest, "write"):
        with open(dest, "w", newline="", encoding="utf-8") as fh:
            return write_sweep_csv(points, fh)
    writer = csv.writer(dest, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for p in points:
        ws = ["", "", ""] if p.weights is None else [repr(x) for x in p.weights.as_tuple()]
        writer.writerow([p.label, *ws, repr(p.utility), repr(p.unfairness_gender),
                         repr(p.unfairness_country), p.n_queries, p.n_skipped])


def evaluate_rankings(rankings: Mapping[str, Sequence[str]], queries: Sequence[QueryRecord],
                      context: RankingContext, *, depth: int = DEFAULT_DEPTH,
                      gamma: float = DEFAULT_GAMMA, task: str = "rerank",
                      k: int = DEFAULT_K) -> list[dict]:
    """Per-query metrics for existing rankings (qid -> doc ids), in query order.

    A metric is None where it is undefined (no relevant documents, no
    resolvable authors).  Queries absent from ``rankings`` are left out.
    """
    rows = []
    for q in queries:
        ranking = rankings.get(q.query_id)
        if ranking is None:
            continue
        try:
            util = utility(ranking, q, depth)
        except UndefinedUtility:
            util = None
        try:
            _, pool = query_pool(q, context, task=task, k=k)
            ug = unfairness(ranking, pool, GENDER, gamma, context)
            uc = unfairness(ranking, pool, COUNTRY, gamma, context)
        except (ValueError, KeyError) as exc:
            log.warning("query %s: unfairness undefined (%s)", q.query_id, exc)
            ug = uc = None
        rows.append({"qid": q.query_id, "utility": util, "unfairness_gender": ug,
                     "unfairness_country": uc})
    return rows
