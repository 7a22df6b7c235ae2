# # BM25 scores and the relevance cost
#
# A three-document toy corpus, scored with Okapi BM25 (k1=1.5, b=0.75).
# Terms that occur in most documents would get a negative idf; those are
# floored to a quarter of the average positive idf.

# %%
from fairrank import PaperDoc, build_index, rank_by_score, tokenize
from fairrank.bm25 import reversed_minmax, score_many

corpus = {
    "d1": PaperDoc("d1", title="Fair ranking", abstract="exposure of author groups"),
    "d2": PaperDoc("d2", title="Ranking with BM25", abstract="term weighting for ranking"),
    "d3": PaperDoc("d3", title="Graph neural networks", abstract="message passing"),
}
index = build_index(corpus)
print(index.doc_count, "documents, average length", index.avg_doc_len)

# %% [markdown]
# `idf` holds the floored values. "ranking" appears in two of three documents,
# so its raw idf is negative and it gets the floor.

# %%
for term in ("ranking", "fair", "exposure"):
    print(f"{term:10s} {index.idf[term]:.4f}")

# %%
query = tokenize("fair ranking")
for doc_id, s in rank_by_score(index, query, list(corpus)):
    print(doc_id, round(s, 4))

# %% [markdown]
# The re-ranker does not use raw scores directly.  It min-max normalizes them
# over the candidate pool and flips the scale, so 0 is the best document and
# 1 the worst.

# %%
costs = reversed_minmax(score_many(index, query, list(corpus)))
costs
