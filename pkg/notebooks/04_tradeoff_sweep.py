# # Relevance versus fairness
#
# A synthetic corpus in which relevant papers are written mostly by authors
# from one gender and one economy group.  Sweeping the cost weights shows
# the trade-off: dropping the relevance weight evens out group exposure but
# costs a lot of NDCG.

# %%
from fairrank import RankingContext, build_index, simplex_grid, sweep
from fairrank.synthetic import make_corpus

data = make_corpus(n_docs=200, n_topics=10, seed=0)
context = RankingContext(build_index(data.corpus), data.corpus, data.authors)
result = sweep(simplex_grid(0.25), data.queries, context, depth=10, gamma=0.5, seed=0)

# %%
print(f"{'point':18s} {'utility':>8s} {'unf_gender':>11s} {'unf_country':>12s}")
for p in result.points:
    print(f"{p.label:18s} {p.utility:8.3f} {p.unfairness_gender:11.4f} "
          f"{p.unfairness_country:12.4f}")

# %% [markdown]
# With matplotlib installed the table plots directly (not a package
# dependency):

# %%
try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None
if plt is not None:
    fig, ax = plt.subplots()
    for p in result.points:
        ax.scatter(p.unfairness_gender, p.utility, marker="x" if p.weights is None else "o")
        ax.annotate(p.label, (p.unfairness_gender, p.utility), fontsize=6)
    ax.set_xlabel("unfairness (gender)")
    ax.set_ylabel("utility (NDCG@10)")
    fig.savefig("tradeoff.png", dpi=120)
