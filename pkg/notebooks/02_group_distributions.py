# # Group distributions, imputation and KL
#
# Every author carries a gender and an economy label.  Missing labels are
# filled in once per run by sampling from the identified authors.

# %%
from collections import Counter

import numpy as np

from fairrank import AuthorRecord, ImputationPolicy, PaperDoc, impute, kl_divergence, \
    pooled_distribution
from fairrank.groups import GroupDistribution

rng = np.random.default_rng(0)
labels = rng.choice(["Male", "Female", "Unknown"], size=2000, p=[0.5, 0.2, 0.3])
authors = {f"a{i}": AuthorRecord(f"a{i}", gender=g, economy="Advanced")
           for i, g in enumerate(labels)}
Counter(a.gender for a in authors.values())

# %% [markdown]
# Identified authors are roughly 5:2 male, so an Unknown becomes Male with
# probability about 0.71.

# %%
filled = impute(authors, ImputationPolicy(seed=1))
Counter(filled[k].gender for k, a in authors.items() if a.gender == "Unknown")

# %% [markdown]
# Document-set distributions pool author occurrences: an author on two
# papers counts twice.

# %%
corpus = {
    "p1": PaperDoc("p1", author_ids=("a0", "a1")),
    "p2": PaperDoc("p2", author_ids=("a0", "a2", "a3")),
}
pooled_distribution(["p1", "p2"], corpus, filled, "gender").probs

# %% [markdown]
# KL divergence is smoothed (1e-6 per cell) so an empty group in a short
# prefix does not make it infinite.

# %%
p = GroupDistribution("gender", {"Male": 1.0, "Female": 0.0})
q = GroupDistribution("gender", {"Male": 0.5, "Female": 0.5})
print(kl_divergence(p, q), np.log(2))
print(kl_divergence(q, p))
