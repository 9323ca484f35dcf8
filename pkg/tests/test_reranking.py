import numpy as np
import pytest
from pytest import approx

from fairrec import (
    CandidateShortfallError,
    GreedyParams,
    InvalidInputError,
    RandomParams,
    ScoreGraph,
    aggregate_diversity,
    greedy_rerank,
    random_rerank,
    top_k,
    write_recommendations,
)

from _oracles import enumerate_small_instances, greedy_rescan


def graph_of(*pairs_per_user, n_items=None):
    m = n_items or (max(i for pairs in pairs_per_user for i, _ in pairs) + 1)
    return ScoreGraph.from_pairs(list(pairs_per_user), m)


# -------------------------------------------------------------- top_k ----

def test_top_k_orders_by_score():
    graph = graph_of([(0, 5.0), (1, 4.0), (2, 1.0)])
    assert top_k(graph, 2).lists.tolist() == [[0, 1]]


def test_top_k_breaks_ties_by_item_id():
    graph = graph_of([(1, 4.0), (0, 4.0)])
    assert top_k(graph, 1).lists.tolist() == [[0]]


def test_top_k_full_candidate_set_in_score_order():
    graph = graph_of([(0, 2.0), (1, 5.0), (2, 3.0)])
    assert top_k(graph, 3).lists.tolist() == [[1, 2, 0]]


def test_top_k_rejects_oversized_k():
    graph = graph_of([(0, 2.0), (1, 5.0)])
    with pytest.raises(CandidateShortfallError, match="user 0"):
        top_k(graph, 3)


def test_top_k_invariant_under_pair_order():
    pairs = [(3, 4.0), (0, 2.5), (7, 4.0), (2, 5.0)]
    a = top_k(ScoreGraph.from_pairs([pairs], 8), 3)
    b = top_k(ScoreGraph.from_pairs([list(reversed(pairs))], 8), 3)
    assert a.lists.tolist() == b.lists.tolist() == [[2, 3, 7]]


# ------------------------------------------------------------- random ----

def _six_item_graph(n_users=1):
    pairs = [(i, 6.0 - i) for i in range(6)]  # scores 6..1 -> items 0..5
    return ScoreGraph.from_pairs([list(pairs) for _ in range(n_users)], 6)


def test_random_with_ell_equal_k_is_top_k():
    graph = _six_item_graph(n_users=3)
    top = top_k(graph, 3)
    for seed in range(5):
        recs = random_rerank(graph, RandomParams(ell=3, seed=seed), 3)
        assert recs.lists.tolist() == top.lists.tolist()


def test_random_sample_is_subset_of_top_ell_and_ordered():
    graph = _six_item_graph()
    top4 = set(top_k(graph, 4).lists[0].tolist())
    for seed in range(10):
        recs = random_rerank(graph, RandomParams(ell=4, seed=seed), 2)
        row = recs.lists[0].tolist()
        assert set(row) <= top4
        assert len(set(row)) == 2
        scores = graph.lookup(0, recs.lists[0])
        assert list(scores) == sorted(scores, reverse=True)


def test_random_is_deterministic_per_seed_and_varies_across_seeds():
    graph = _six_item_graph()
    a = random_rerank(graph, RandomParams(ell=6, seed=11), 2)
    b = random_rerank(graph, RandomParams(ell=6, seed=11), 2)
    assert np.array_equal(a.lists, b.lists)
    draws = {
        tuple(random_rerank(graph, RandomParams(ell=6, seed=s), 2).lists[0].tolist())
        for s in range(10)
    }
    assert len(draws) > 1


def test_random_users_get_independent_substreams():
    graph = _six_item_graph(n_users=2)
    differing = 0
    for seed in range(10):
        recs = random_rerank(graph, RandomParams(ell=6, seed=seed), 2)
        if recs.lists[0].tolist() != recs.lists[1].tolist():
            differing += 1
    assert differing > 0


def test_random_truncates_ell_to_candidate_count():
    graph = _six_item_graph()
    recs = random_rerank(graph, RandomParams(ell=500, seed=3), 4)
    assert len(set(recs.lists[0].tolist())) == 4


def test_random_rejects_ell_below_k():
    graph = _six_item_graph()
    with pytest.raises(InvalidInputError):
        random_rerank(graph, RandomParams(ell=2, seed=0), 3)


def test_random_params_validation():
    with pytest.raises(InvalidInputError):
        RandomParams(ell=0)
    with pytest.raises(InvalidInputError):
        RandomParams(ell=5, seed=-1)


def test_random_uniform_over_top_two():
    # k=1, ell=2: each of the top-2 items should win about half of the time
    graph = graph_of([(0, 5.0), (1, 4.0), (2, 1.0)])
    counts = {0: 0, 1: 0}
    for seed in range(10000):
        item = random_rerank(graph, RandomParams(ell=2, seed=seed), 1).lists[0, 0]
        counts[int(item)] += 1
    assert counts[0] + counts[1] == 10000
    assert abs(counts[0] - 5000) <= 150


def test_random_overlap_matches_hypergeometric_mean():
    # top-k is inside top-ell, so E[|sample intersect top-k|] = k^2 / ell
    rng = np.random.default_rng(42)
    n_users, n_items, k, ell = 30, 40, 4, 12
    pairs = [
        [(i, float(s)) for i, s in enumerate(rng.permutation(n_items) / 10 + 1.0)]
        for _ in range(n_users)
    ]
    graph = ScoreGraph.from_pairs(pairs, n_items)
    top = top_k(graph, k)
    total = 0.0
    draws = 0
    for seed in range(200):
        recs = random_rerank(graph, RandomParams(ell=ell, seed=seed), k)
        for u in range(n_users):
            total += np.intersect1d(recs.lists[u], top.lists[u]).size
            draws += 1
    assert total / draws == approx(k * k / ell, abs=0.05)


# ------------------------------------------------------------- greedy ----

def _worked_example():
    graph = graph_of(
        [(0, 5.0), (1, 4.0), (2, 1.0)],
        [(0, 5.0), (1, 2.0)],
        n_items=3,
    )
    return graph, top_k(graph, 1)


def test_greedy_theta_zero_is_a_no_op():
    graph, base = _worked_example()
    result = greedy_rerank(graph, base, GreedyParams(theta=0))
    assert np.array_equal(result.recommendations.lists, base.lists)
    assert result.achieved_increase == 0


def test_greedy_worked_example_single_replacement():
    graph, base = _worked_example()
    assert base.lists.tolist() == [[0], [0]]
    result = greedy_rerank(graph, base, GreedyParams(theta=1, threshold=3.5))
    assert result.recommendations.lists.tolist() == [[1], [0]]
    assert result.achieved_increase == 1


def test_greedy_high_threshold_makes_no_move():
    graph, base = _worked_example()
    result = greedy_rerank(graph, base, GreedyParams(theta=1, threshold=4.5))
    assert np.array_equal(result.recommendations.lists, base.lists)
    assert result.achieved_increase == 0


def test_greedy_params_validation():
    with pytest.raises(InvalidInputError):
        GreedyParams(theta=-1)
    with pytest.raises(InvalidInputError):
        GreedyParams(theta=1, threshold=0.5)
    with pytest.raises(InvalidInputError):
        GreedyParams(theta=1, threshold=5.5)


def _random_graph(seed, n_users=12, n_items=30, rated_fraction=0.4):
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(n_users):
        size = int(n_items * (1 - rated_fraction))
        items = rng.choice(n_items, size=size, replace=False)
        pairs.append([(int(i), float(rng.uniform(1, 5))) for i in items])
    return ScoreGraph.from_pairs(pairs, n_items)


def test_greedy_structural_invariants():
    graph = _random_graph(3)
    k = 3
    base = top_k(graph, k)
    base_pool = set(base.lists.ravel().tolist())
    feasible = greedy_rerank(graph, base, GreedyParams(theta=graph.n_items)).achieved_increase

    previous_agg = None
    for theta in (0, 1, 2, 5, 9, 30):
        result = greedy_rerank(graph, base, GreedyParams(theta=theta))
        recs = result.recommendations
        assert result.achieved_increase == min(theta, feasible)

        pool = set(recs.lists.ravel().tolist())
        assert base_pool <= pool
        assert len(pool) == len(base_pool) + result.achieved_increase

        counts = np.bincount(recs.lists.ravel(), minlength=graph.n_items)
        for item in pool - base_pool:
            assert counts[item] == 1

        for u in range(graph.n_users):
            row = recs.lists[u]
            assert len(set(row.tolist())) == k
            assert set(row.tolist()) <= set(graph.items[u].tolist())
            scores = graph.lookup(u, row)
            assert list(scores) == sorted(scores, reverse=True)
            for item in set(row.tolist()) - set(base.lists[u].tolist()):
                assert graph.lookup(u, np.array([item]))[0] >= 3.5

        agg = aggregate_diversity(recs, graph.n_items)
        if previous_agg is not None:
            assert agg >= previous_agg
        previous_agg = agg


def test_greedy_matches_rescan_oracle_on_enumerated_instances():
    checked = 0
    for graph, k in enumerate_small_instances():
        base = top_k(graph, k)
        for threshold in (3.5, 4.5):
            for theta in (1, 2, graph.n_items):
                result = greedy_rerank(graph, base, GreedyParams(theta=theta, threshold=threshold))
                expected_lists, expected_achieved = greedy_rescan(
                    graph, base.lists, k, theta, threshold
                )
                assert result.recommendations.lists.tolist() == expected_lists
                assert result.achieved_increase == expected_achieved
                checked += 1
    assert checked >= 500


def test_greedy_matches_rescan_oracle_at_medium_scale():
    graph = _random_graph(21, n_users=30, n_items=60, rated_fraction=0.3)
    base = top_k(graph, 3)
    for theta in (5, 40):
        result = greedy_rerank(graph, base, GreedyParams(theta=theta, threshold=3.0))
        lists, achieved = greedy_rescan(graph, base.lists, 3, theta, 3.0)
        assert result.recommendations.lists.tolist() == lists
        assert result.achieved_increase == achieved


def test_greedy_is_deterministic():
    graph = _random_graph(9)
    base = top_k(graph, 2)
    a = greedy_rerank(graph, base, GreedyParams(theta=7))
    b = greedy_rerank(graph, base, GreedyParams(theta=7))
    assert np.array_equal(a.recommendations.lists, b.recommendations.lists)
    assert a.achieved_increase == b.achieved_increase


def test_greedy_rejects_mismatched_base():
    graph = _random_graph(1, n_users=4)
    other = _random_graph(1, n_users=5)
    base = top_k(other, 2)
    with pytest.raises(InvalidInputError):
        greedy_rerank(graph, base, GreedyParams(theta=1))


# ------------------------------------------------------------- export ----

def test_write_recommendations_csv(tmp_path):
    graph = graph_of([(0, 5.0), (1, 4.123456789), (2, 1.0)])
    top = top_k(graph, 2)
    out = tmp_path / "recs.csv"
    write_recommendations(top, graph, out)
    lines = out.read_text().splitlines()
    assert lines[0] == "user,rank,item,score"
    assert lines[1] == "0,1,0,5.000000"
    assert lines[2] == "0,2,1,4.123457"
