"""Author group variables: imputation of missing labels, document-set
distributions and smoothed KL divergence."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, Optional, Sequence

import numpy as np

from .corpus import ECONOMY_VALUES, GENDER_VALUES, UNKNOWN, AuthorRecord, PaperDoc

KL_ALPHA = 1e-6


@dataclass(frozen=True)
class GroupVariable:
    name: str
    attribute: str  # AuthorRecord field holding the label
    values: tuple[str, ...]

    def label(self, author: AuthorRecord) -> str:
        return getattr(author, self.attribute)


GENDER = GroupVariable("gender", "gender", GENDER_VALUES)
COUNTRY = GroupVariable("country", "economy", ECONOMY_VALUES)
VARIABLES = {v.name: v for v in (GENDER, COUNTRY)}


def get_variable(variable) -> GroupVariable:
    if isinstance(variable, GroupVariable):
        return variable
    try:
        return VARIABLES[variable]
    except KeyError:
        raise ValueError(f"unknown group variable {variable!r}; "
                         f"expected one of {sorted(VARIABLES)}") from None


@dataclass(frozen=True)
class GroupDistribution:
    variable: str
    probs: Mapping[str, float]

    def __post_init__(self):
        if UNKNOWN in self.probs:
            raise ValueError("a group distribution cannot carry Unknown mass")
        if any(p < 0 for p in self.probs.values()):
            raise ValueError("probabilities must be nonnegative")
        total = math.fsum(self.probs.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total}, not 1")

    def vector(self, values: Sequence[str]) -> list[float]:
        return [self.probs.get(v, 0.0) for v in values]


@dataclass(frozen=True)
class ImputationPolicy:
    seed: int = 0
    strategy: str = "sample_by_corpus_fraction"


def identified_fractions(authors: Mapping[str, AuthorRecord], variable) -> dict[str, float]:
    """Share of each value among authors whose label is known."""
    var = get_variable(variable)
    counts = {v: 0 for v in var.values}
    for rec in authors.values():
        label = var.label(rec)
        if label != UNKNOWN:
            counts[label] += 1
    total = sum(counts.values())
    if total == 0:
        raise ValueError(f"every author has an Unknown {var.name} label; nothing to impute from")
    return {v: n / total for v, n in counts.items()}


def impute(authors: Mapping[str, AuthorRecord], policy: ImputationPolicy = ImputationPolicy(),
           variables: Sequence = (GENDER, COUNTRY)) -> dict[str, AuthorRecord]:
    """Replace every Unknown label by a draw from the identified-label fractions.

    Unknown authors are visited in sorted id order and variables in the given
    order, so the outcome depends only on the seed and the table contents.
    Known labels are never touched.
    """
    if policy.strategy != "sample_by_corpus_fraction":
        raise ValueError(f"unsupported imputation strategy {policy.strategy!r}")
    rng = np.random.default_rng(policy.seed)
    out = dict(authors)
    for variable in variables:
        var = get_variable(variable)
        fractions = identified_fractions(authors, var)
        missing = sorted(aid for aid, rec in authors.items() if var.label(rec) == UNKNOWN)
        if not missing:
            continue
        draws = rng.choice(len(var.values), size=len(missing), p=[fractions[v] for v in var.values])
        for aid, k in zip(missing, draws):
            out[aid] = replace(out[aid], **{var.attribute: var.values[k]})
    return out


def needs_imputation(authors: Mapping[str, AuthorRecord],
                     variables: Sequence = (GENDER, COUNTRY)) -> bool:
    vars_ = [get_variable(v) for v in variables]
    return any(v.label(rec) == UNKNOWN for rec in authors.values() for v in vars_)


def doc_group_counts(doc: PaperDoc, authors: Mapping[str, AuthorRecord], variable) -> list[int]:
    """Label counts over one document's resolvable authors, in ``variable.values`` order."""
    var = get_variable(variable)
    counts = [0] * len(var.values)
    for aid in doc.author_ids:
        rec = authors.get(aid)
        if rec is None:
            continue
        label = var.label(rec)
        if label == UNKNOWN:
            raise ValueError(f"author {aid!r} has no {var.name} label; impute first")
        counts[var.values.index(label)] += 1
    return counts


def group_counts(doc_ids: Sequence[str], corpus: Mapping[str, PaperDoc],
                 authors: Mapping[str, AuthorRecord], variable,
                 weights: Optional[Sequence[float]] = None) -> list[float]:
    """Author occurrences pooled over ``doc_ids``, optionally weighted per document."""
    var = get_variable(variable)
    totals = [0.0] * len(var.values)
    for i, d in enumerate(doc_ids):
        w = 1.0 if weights is None else weights[i]
        for j, n in enumerate(doc_group_counts(corpus[d], authors, var)):
            totals[j] += w * n
    return totals


def distribution_from_counts(counts: Sequence[float], variable) -> GroupDistribution:
    var = get_variable(variable)
    total = math.fsum(counts)
    if total <= 0:
        raise ValueError(f"no resolvable authors; {var.name} distribution is undefined")
    return GroupDistribution(var.name, {v: c / total for v, c in zip(var.values, counts)})


def pooled_distribution(doc_ids: Sequence[str], corpus: Mapping[str, PaperDoc],
                        authors: Mapping[str, AuthorRecord], variable) -> GroupDistribution:
    """Group distribution of all author occurrences across ``doc_ids``.

    An author appearing on two listed documents counts twice; documents
    without resolvable authors add nothing.
    """
    if not doc_ids:
        raise ValueError("empty document list")
    return distribution_from_counts(group_counts(doc_ids, corpus, authors, variable), variable)


def count_probs(counts: Sequence[float]) -> list[float]:
    # no mass at all reads as uniform, which is what smoothing gives in the limit
    total = math.fsum(counts)
    if total <= 0:
        return [1.0 / len(counts)] * len(counts)
    return [c / total for c in counts]


def smoothed_kl(p: Sequence[float], q: Sequence[float], alpha: float = KL_ALPHA) -> float:
    """``sum p ln(p/q)`` after adding ``alpha`` to every cell of both and renormalizing."""
    if len(p) != len(q):
        raise ValueError("distributions have different supports")
    z = 1.0 + len(p) * alpha
    total = 0.0
    for pi, qi in zip(p, q):
        ps = (pi + alpha) / z
        qs = (qi + alpha) / z
        total += ps * math.log(ps / qs)
    return max(total, 0.0)


def kl_divergence(p: GroupDistribution, q: GroupDistribution, alpha: float = KL_ALPHA) -> float:
    if p.variable != q.variable:
        raise ValueError(f"cannot compare a {p.variable} distribution with a {q.variable} one")
    if set(p.probs) != set(q.probs):
        raise ValueError("distributions are over different value sets")
    var = VARIABLES.get(p.variable)
    values = var.values if var is not None and set(var.values) == set(p.probs) else sorted(p.probs)
    return smoothed_kl(p.vector(values), q.vector(values), alpha)
