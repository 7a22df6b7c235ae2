"""Seeded synthetic corpora with group-skewed relevance, for demos and tests.

Each query belongs to one topic.  Its candidate list holds every document of
that topic; the relevant ones repeat the query terms often and are written
mostly by authors from the majority groups (Male, Advanced), while the
non-relevant ones mention the terms once and skew toward the minority
groups.  Pure BM25 therefore front-loads the majority groups.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import (ADVANCED, DEVELOPING, FEMALE, MALE, UNKNOWN, AuthorRecord, PaperDoc,
                     QueryRecord)

_SYLLABLES = ("ka", "lo", "mi", "ne", "ru", "sa", "to", "vi", "ze", "po", "qu", "fe")


@dataclass
class SyntheticData:
    corpus: dict[str, PaperDoc]
    authors: dict[str, AuthorRecord]
    queries: list[QueryRecord]


def _word(rng) -> str:
    return "".join(rng.choice(_SYLLABLES, size=3))


def make_corpus(n_docs: int = 200, n_topics: int = 10, relevant_per_topic: int = 5,
                n_authors: int = 300, unknown_rate: float = 0.0, seed: int = 0,
                majority_share: float = 0.9) -> SyntheticData:
    """Build a corpus of ``n_docs`` documents spread evenly over ``n_topics`` queries.

    ``majority_share`` is the probability that an author of a relevant document
    comes from the majority pool (and of a non-relevant one from the minority
    pool).  ``unknown_rate`` blanks that fraction of author labels.
    """
    rng = np.random.default_rng(seed)
    filler = sorted({_word(rng) for _ in range(400)})
    topics = []
    for _ in range(n_topics):
        topics.append([f"t{len(topics)}{_word(rng)}" for _ in range(4)])

    half = n_authors // 2
    authors = {}
    for i in range(n_authors):
        majority = i < half
        gender = MALE if (majority if rng.random() < 0.85 else not majority) else FEMALE
        economy = ADVANCED if (majority if rng.random() < 0.85 else not majority) else DEVELOPING
        if rng.random() < unknown_rate:
            gender = UNKNOWN
        if rng.random() < unknown_rate:
            economy = UNKNOWN
        authors[f"a{i:04d}"] = AuthorRecord(
            author_id=f"a{i:04d}", name=f"Author {i}",
            num_citations=int(rng.integers(0, 5000)), h_index=int(rng.integers(0, 60)),
            i10_index=int(rng.integers(0, 100)), num_papers=int(rng.integers(1, 300)),
            gender=gender, economy=economy)
    author_ids = list(authors)

    corpus = {}
    per_topic: dict[int, list[tuple[str, int]]] = {t: [] for t in range(n_topics)}
    for n in range(n_docs):
        t = n % n_topics
        doc_id = f"d{n:04d}"
        relevant = len(per_topic[t]) < relevant_per_topic
        terms = topics[t]
        repeats = int(rng.integers(3, 6)) if relevant else 1
        words = list(rng.choice(filler, size=int(rng.integers(20, 40))))
        words += [w for w in terms[:2] for _ in range(repeats)] + list(terms[2:])
        rng.shuffle(words)
        n_auth = int(rng.integers(1, 4))
        chosen = []
        for _ in range(n_auth):
            from_majority = (rng.random() < majority_share) == relevant
            lo, hi = (0, half) if from_majority else (half, n_authors)
            chosen.append(author_ids[int(rng.integers(lo, hi))])
        corpus[doc_id] = PaperDoc(
            doc_id=doc_id,
            title=" ".join(words[:6]).capitalize(),
            abstract=" ".join(words[6:]) + ".",
            author_ids=tuple(dict.fromkeys(chosen)),
            year=int(rng.integers(1995, 2021)),
            venue="Synthetic Proceedings",
        )
        per_topic[t].append((doc_id, int(relevant)))

    queries = []
    for t in range(n_topics):
        docs = per_topic[t]
        order = rng.permutation(len(docs))
        queries.append(QueryRecord(
            query_id=f"q{t:03d}",
            query_text=" ".join(topics[t][:2]),
            frequency=int(rng.integers(1, 50)),
            documents=tuple(docs[i] for i in order),
        ))
    return SyntheticData(corpus, authors, queries)
