"""Top-k list construction and the two diversity post-processors.

Lists are always ordered by descending score with ties broken by ascending
item id. Random draws k items uniformly from each user's top-l list using a
per-user substream of the global seed, so results do not depend on
evaluation order. Greedy introduces not-yet-recommended items with a score
above a threshold, one at a time in globally descending score order, each
replacing the victim user's lowest-ranked recommendation that at least one
other user still receives; the recommended-item pool therefore never
shrinks and grows by exactly the achieved increase.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import IO

import numpy as np

from .dataset import RATING_MAX, RATING_MIN, RatingsDataset
from .errors import CandidateShortfallError, InvalidInputError
from .predictors import ScoreGraph


@dataclass(frozen=True)
class RandomParams:
    ell: int
    seed: int = 0

    def __post_init__(self) -> None:
        if self.ell < 1:
            raise InvalidInputError("ell must be >= 1")
        if self.seed < 0:
            raise InvalidInputError("seed must be non-negative")

    def tag(self) -> str:
        return f"random(ell={self.ell},seed={self.seed})"


@dataclass(frozen=True)
class GreedyParams:
    theta: int
    threshold: float = 3.5

    def __post_init__(self) -> None:
        if self.theta < 0:
            raise InvalidInputError("theta must be >= 0")
        if not RATING_MIN <= self.threshold <= RATING_MAX:
            raise InvalidInputError("threshold must lie in [1, 5]")

    def tag(self) -> str:
        return f"greedy(theta={self.theta},threshold={self.threshold})"


@dataclass
class RecommendationSet:
    """Exactly k distinct candidate items per user, highest score first."""

    k: int
    lists: np.ndarray  # (n_users, k) dense item ids
    provenance: str = "none"

    @property
    def n_users(self) -> int:
        return self.lists.shape[0]


@dataclass
class GreedyRerankResult:
    recommendations: RecommendationSet
    achieved_increase: int


def _ranked_order(graph: ScoreGraph, user: int) -> np.ndarray:
    """Positions of a user's candidates sorted by (score desc, item id asc)."""
    return np.lexsort((graph.items[user], -graph.scores[user]))


def top_k(graph: ScoreGraph, k: int) -> RecommendationSet:
    """The k highest-scored candidates per user."""
    if k < 1:
        raise InvalidInputError("k must be >= 1")
    lists = np.empty((graph.n_users, k), dtype=np.int64)
    for u in range(graph.n_users):
        if graph.items[u].size < k:
            raise CandidateShortfallError(
                f"user {u} has only {graph.items[u].size} candidates, needs k={k}"
            )
        lists[u] = graph.items[u][_ranked_order(graph, u)[:k]]
    return RecommendationSet(k=k, lists=lists, provenance="none")


def random_rerank(graph: ScoreGraph, params: RandomParams, k: int) -> RecommendationSet:
    """Sample k items uniformly without replacement from each user's top-l.

    l is truncated to the candidate count for users with fewer than l
    candidates. The draw for user u comes from the (seed, u) substream, so
    it is reproducible and independent of other users.
    """
    if params.ell < k:
        raise InvalidInputError(f"ell={params.ell} must be >= k={k}")
    lists = np.empty((graph.n_users, k), dtype=np.int64)
    for u in range(graph.n_users):
        if graph.items[u].size < k:
            raise CandidateShortfallError(
                f"user {u} has only {graph.items[u].size} candidates, needs k={k}"
            )
        limit = min(params.ell, graph.items[u].size)
        prefix = _ranked_order(graph, u)[:limit]
        rng = np.random.default_rng([params.seed, u])
        chosen = prefix[rng.choice(limit, size=k, replace=False)]
        picked_items = graph.items[u][chosen]
        picked_scores = graph.scores[u][chosen]
        lists[u] = picked_items[np.lexsort((picked_items, -picked_scores))]
    return RecommendationSet(k=k, lists=lists, provenance=params.tag())


def greedy_rerank(
    graph: ScoreGraph, base: RecommendationSet, params: GreedyParams
) -> GreedyRerankResult:
    """Raise the number of distinct recommended items by up to theta.

    Moves are (user, item) pairs with the item outside the current pool and
    a score of at least the threshold, applied in order of descending score
    (ties: lower item id, then lower user id). A move replaces the user's
    lowest-scored list entry whose pool count is still >= 2; users without
    such an entry are skipped for that item. Stops after theta introductions
    or when no feasible move remains, reporting the achieved increase.
    """
    if base.n_users != graph.n_users:
        raise InvalidInputError("base recommendations do not match the score graph")
    k = base.k
    counts = np.bincount(base.lists.ravel(), minlength=graph.n_items)

    move_scores: list[np.ndarray] = []
    move_items: list[np.ndarray] = []
    move_users: list[np.ndarray] = []
    in_pool = counts > 0
    for u in range(graph.n_users):
        eligible = (graph.scores[u] >= params.threshold) & ~in_pool[graph.items[u]]
        move_scores.append(graph.scores[u][eligible])
        move_items.append(graph.items[u][eligible])
        move_users.append(np.full(int(eligible.sum()), u, dtype=np.int64))
    scores_all = np.concatenate(move_scores) if move_scores else np.empty(0)
    items_all = np.concatenate(move_items) if move_items else np.empty(0, dtype=np.int64)
    users_all = np.concatenate(move_users) if move_users else np.empty(0, dtype=np.int64)
    order = np.lexsort((users_all, items_all, -scores_all))

    current = [list(row) for row in base.lists.tolist()]
    current_scores = [graph.lookup(u, base.lists[u]).tolist() for u in range(graph.n_users)]
    counts_list = counts.tolist()
    walk_items = items_all[order].tolist()
    walk_users = users_all[order].tolist()
    walk_scores = scores_all[order].tolist()

    achieved = 0
    for item, user, score in zip(walk_items, walk_users, walk_scores):
        if achieved >= params.theta:
            break
        if counts_list[item] > 0:
            continue
        # victim: lowest score, breaking ties toward the last-ranked (higher id)
        victim_pos = -1
        victim_key: tuple[float, int] | None = None
        row = current[user]
        row_scores = current_scores[user]
        for pos in range(k):
            if counts_list[row[pos]] < 2:
                continue
            key = (row_scores[pos], -row[pos])
            if victim_key is None or key < victim_key:
                victim_key = key
                victim_pos = pos
        if victim_pos < 0:
            continue
        counts_list[row[victim_pos]] -= 1
        counts_list[item] = 1
        row[victim_pos] = item
        row_scores[victim_pos] = score
        achieved += 1

    lists = np.empty((graph.n_users, k), dtype=np.int64)
    for u in range(graph.n_users):
        items_u = np.asarray(current[u], dtype=np.int64)
        scores_u = np.asarray(current_scores[u])
        lists[u] = items_u[np.lexsort((items_u, -scores_u))]
    recs = RecommendationSet(k=k, lists=lists, provenance=params.tag())
    return GreedyRerankResult(recommendations=recs, achieved_increase=achieved)


def write_recommendations(
    recs: RecommendationSet,
    graph: ScoreGraph,
    destination: str | Path | IO[str],
    dataset: RatingsDataset | None = None,
) -> None:
    """Export as CSV ``user,rank,item,score`` with ranks 1..k.

    With a dataset, ids are translated back to raw file ids.
    """
    rows = ["user,rank,item,score\n"]
    for u in range(recs.n_users):
        scores = graph.lookup(u, recs.lists[u])
        user_label = dataset.user_ids[u] if dataset is not None else u
        for rank, (item, score) in enumerate(zip(recs.lists[u], scores), start=1):
            item_label = dataset.item_ids[item] if dataset is not None else item
            rows.append(f"{user_label},{rank},{item_label},{score:.6f}\n")
    if isinstance(destination, (str, Path)):
        with open(destination, "w", encoding="ascii", newline="") as handle:
            handle.writelines(rows)
    else:
        destination.writelines(rows)
