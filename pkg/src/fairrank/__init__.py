"""BM25 retrieval with fairness-aware greedy re-ranking for academic paper corpora."""

from .bm25 import Bm25Index, build_index, rank_by_score, relevance_cost, score
from .corpus import (AuthorRecord, PaperDoc, QueryRecord, group_stats, load_authors,
                     load_corpus, load_queries)
from .evaluation import baseline_random, sweep, unfairness, utility
from .groups import ImputationPolicy, impute, kl_divergence, pooled_distribution
from .reranker import (CostBreakdown, RankedList, RankingContext, WeightVector, candidate_pool,
                       cost, rerank, simplex_grid)
from .textprep import doc_text, tokenize

__version__ = "0.1.0"

__all__ = [
    "AuthorRecord", "Bm25Index", "CostBreakdown", "ImputationPolicy", "PaperDoc", "QueryRecord",
    "RankedList", "RankingContext", "WeightVector", "baseline_random", "build_index",
    "candidate_pool", "cost", "doc_text", "group_stats", "impute", "kl_divergence",
    "load_authors", "load_corpus", "load_queries", "pooled_distribution", "rank_by_score",
    "relevance_cost", "rerank", "score", "simplex_grid", "sweep", "tokenize", "unfairness",
    "utility",
]
