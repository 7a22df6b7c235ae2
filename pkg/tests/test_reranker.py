import json
import math
import random

import pytest

from conftest import make_context
from oracles import eq1, random_instance, random_weights
from fairrank.bm25 import rank_by_score, relevance_cost, score
from fairrank.corpus import FEMALE, MALE, QueryRecord
from fairrank.reranker import (RankedList, WeightVector, candidate_pool, cost, query_pool,
                               rerank, run_query, simplex_grid)
from fairrank.textprep import tokenize

M_A, M_D, F_A, F_D = (MALE, "Advanced"), (MALE, "Developing"), (FEMALE, "Advanced"), \
    (FEMALE, "Developing")


def test_weight_vector_validation():
    assert WeightVector.parse("0.5, 0.25,0.25").as_tuple() == (0.5, 0.25, 0.25)
    for bad in ("0.5,0.5,0.5", "-0.5,1,0.5", "1,0"):
        with pytest.raises(ValueError):
            WeightVector.parse(bad)
    assert WeightVector(1, 0, 0).label == "w=1,0,0"


def test_grid_has_fifteen_points():
    grid = simplex_grid(0.25)
    assert len(grid) == 15 and len(set(grid)) == 15
    assert grid[0].as_tuple() == (1, 0, 0)
    assert WeightVector(0, 0.5, 0.5) in grid
    assert [w.w_r for w in grid] == sorted((w.w_r for w in grid), reverse=True)
    with pytest.raises(ValueError):
        simplex_grid(0.3)


TEN = {f"d{i}": " ".join(["fair"] * (i % 4 + 1) + ["filler"] * (i % 3)) for i in range(10)}


@pytest.fixture(scope="module")
def ten():
    return make_context(TEN, {d: [M_A] for d in TEN})


def test_candidate_pool_top_k(ten):
    pool = candidate_pool(ten.index, ["fair"], 3)
    assert pool == [d for d, _ in rank_by_score(ten.index, ["fair"], list(TEN))[:3]]
    assert len(candidate_pool(ten.index, ["fair"], 50)) == 10
    assert set(candidate_pool(ten.index, ["fair"], 5, ["d1", "d2", "d7"])) <= {"d1", "d2", "d7"}
    with pytest.raises(ValueError):
        candidate_pool(ten.index, ["fair"], 0)
    with pytest.raises(ValueError):
        candidate_pool(ten.index, ["fair"], 3, [])


# four documents, hand-set scores
FOUR_LABELS = {"a": [M_A], "b": [F_D], "c": [M_A, M_D], "d": [F_A]}
FOUR_SCORES = {"a": 4.0, "b": 3.0, "c": 2.0, "d": 1.0}


@pytest.fixture(scope="module")
def four():
    return make_context({d: "paper" for d in FOUR_LABELS}, FOUR_LABELS)


def test_cost_matches_arithmetic_oracle(four):
    pool = list(FOUR_LABELS)
    rng = random.Random(2)
    for _ in range(50):
        w = random_weights(rng)
        current = rng.sample(pool, rng.randint(0, 3))
        for doc in set(pool) - set(current):
            got = cost(doc, WeightVector(*w), current, pool, [], four, scores=FOUR_SCORES)
            want = eq1(doc, w, current, pool, FOUR_SCORES, FOUR_LABELS)
            assert got.as_list() == pytest.approx(list(want), abs=1e-9)


def test_cost_hand_numbers(four):
    # R + {b}: gender (0, 1) vs pool (3/5, 2/5); country (0, 1) vs (3/5, 2/5)
    c = cost("b", WeightVector(0.5, 0.25, 0.25), [], list(FOUR_LABELS), [], four,
             scores=FOUR_SCORES)
    assert c.relevance_term == pytest.approx(1 / 3)
    assert c.kl_gender_term == pytest.approx(math.log(2.5), abs=1e-4)
    assert c.kl_country_term == pytest.approx(math.log(2.5), abs=1e-4)
    assert c.total == pytest.approx(0.5 / 3 + 0.5 * math.log(2.5), abs=1e-4)


def test_cost_with_relevance_only_is_relevance_cost():
    ctx = make_context(TEN, {d: [M_A] if i % 2 else [F_D] for i, d in enumerate(TEN)})
    pool = list(TEN)
    for d in pool:
        c = cost(d, WeightVector(1, 0, 0), [], pool, ["fair"], ctx)
        assert c.total == relevance_cost(ctx.index, ["fair"], d, pool)


def test_cost_kl_zero_when_candidate_mirrors_pool():
    ctx = make_context({"p": "paper", "q": "paper"}, {"p": [M_A, F_D], "q": [M_A, F_D]})
    c = cost("p", WeightVector(0, 0.5, 0.5), [], ["p", "q"], ["paper"], ctx)
    assert c.kl_gender_term < 1e-4 and c.kl_country_term < 1e-4


def test_cost_rejects_ranked_doc(four):
    with pytest.raises(ValueError):
        cost("a", WeightVector(1, 0, 0), ["a"], list(FOUR_LABELS), [], four)
    ranked = RankedList("q", (("a", None),))
    with pytest.raises(ValueError):
        cost("a", WeightVector(1, 0, 0), ranked, list(FOUR_LABELS), [], four)


def test_relevance_only_rerank_is_bm25_order(ten):
    pool = list(TEN)
    got = rerank(pool, WeightVector(1, 0, 0), 10, ["fair"], ten)
    assert got.doc_ids == [d for d, _ in rank_by_score(ten.index, ["fair"], pool)]


def test_single_step_is_pool_minimum(four):
    pool = list(FOUR_LABELS)
    w = WeightVector(0.2, 0.4, 0.4)
    (doc, best), = rerank(pool, w, 1, [], four, scores=FOUR_SCORES).entries
    costs = {d: cost(d, w, [], pool, [], four, scores=FOUR_SCORES).total for d in pool}
    assert best.total == min(costs.values())
    assert doc == min(d for d in pool if costs[d] == best.total)


def test_ties_go_to_smaller_doc_id():
    ctx = make_context({"b": "same", "a": "same", "c": "same"}, {})
    assert rerank(["c", "b", "a"], WeightVector(0, 0.5, 0.5), 3, ["same"], ctx).doc_ids == \
        ["a", "b", "c"]


def test_length_contract(four):
    pool = list(FOUR_LABELS)
    assert len(rerank(pool, WeightVector(1, 0, 0), 2, [], four)) == 2
    with pytest.raises(ValueError):
        rerank(pool, WeightVector(1, 0, 0), 5, [], four)
    with pytest.raises(ValueError):
        rerank(pool, WeightVector(1, 0, 0), 0, [], four)


def check_greedy(ranked, w, pool, scores, labels, ctx, query=()):
    """Every appended doc is the exact per-step minimum, ties to the smaller id."""
    chosen = []
    for doc, breakdown in ranked.entries:
        remaining = sorted(set(pool) - set(chosen))
        exact = {d: cost(d, WeightVector(*w), chosen, pool, list(query), ctx,
                         scores=scores).total for d in remaining}
        best = min(exact.values())
        assert breakdown.total == exact[doc] == best
        assert doc == min(d for d in remaining if exact[d] == best)
        oracle = eq1(doc, w, chosen, pool, scores, labels)
        assert breakdown.as_list() == pytest.approx(list(oracle), abs=1e-9)
        chosen.append(doc)


def test_greedy_oracle_on_random_instances():
    rng = random.Random(7)
    for _ in range(40):
        texts, labels, q = random_instance(rng, max_docs=6)
        ctx = make_context(texts, labels)
        query = tokenize(q)
        pool = list(texts)
        scores = {d: score(ctx.index, query, d) for d in pool}
        w = random_weights(rng)
        ranked = rerank(pool, WeightVector(*w), rng.randint(1, len(pool)), query, ctx)
        check_greedy(ranked, w, pool, scores, labels, ctx, query)


def test_relevance_free_rerank_ignores_score_rescaling():
    rng = random.Random(8)
    for _ in range(20):
        texts, labels, q = random_instance(rng)
        ctx = make_context(texts, labels)
        query = tokenize(q)
        pool = list(texts)
        raw = {d: score(ctx.index, query, d) for d in pool}
        g = rng.random()
        w = WeightVector(0, g, 1 - g)
        base = rerank(pool, w, len(pool), query, ctx)
        for f in (lambda s: 3 * s + 1, math.exp, lambda s: s ** 3 - 7):
            again = rerank(pool, w, len(pool), query, ctx,
                           scores={d: f(s) for d, s in raw.items()})
            assert again.doc_ids == base.doc_ids


def test_larger_reference_pool(four):
    pool = ["a", "b"]
    ref = list(FOUR_LABELS)
    ranked = rerank(pool, WeightVector(0.3, 0.4, 0.3), 2, [], four, reference=ref,
                    scores=FOUR_SCORES)
    chosen = []
    for doc, breakdown in ranked.entries:
        assert breakdown.as_list() == pytest.approx(
            list(eq1(doc, (0.3, 0.4, 0.3), chosen, ref, FOUR_SCORES, FOUR_LABELS)), abs=1e-9)
        chosen.append(doc)
    with pytest.raises(ValueError):
        rerank(ref, WeightVector(1, 0, 0), 1, [], four, reference=pool)


def test_rerank_is_deterministic(ten):
    w = WeightVector(0.25, 0.5, 0.25)
    one = rerank(list(TEN), w, 6, ["fair"], ten, query_id="q", seed=3)
    two = rerank(list(reversed(TEN)), w, 6, ["fair"], ten, query_id="q", seed=3)
    assert json.dumps(one.to_json_obj()) == json.dumps(two.to_json_obj())
    obj = one.to_json_obj()
    assert obj["weights"] == [0.25, 0.5, 0.25] and obj["seed"] == 3
    assert len(obj["costs"]) == 6 and len(obj["costs"][0]) == 4


def test_query_pool_tasks(ten):
    q = QueryRecord("q1", "Fair", documents=(("d1", 1), ("d2", 0), ("zz", None)),
                    unknown_doc_ids=("zz",))
    _, pool = query_pool(q, ten, task="rerank")
    assert sorted(pool) == ["d1", "d2"]
    _, pool = query_pool(q, ten, task="retrieve", k=4)
    assert len(pool) == 4
    with pytest.raises(ValueError):
        query_pool(q, ten, task="other")
    assert len(run_query(q, ten, WeightVector(1, 0, 0))) == 2
