"""Predicted preference scores over candidate items.

Two collaborative-filtering predictors produce a ScoreGraph: user-based
k-nearest neighbors (mean-centered cosine similarity, deviation-weighted
aggregation) and non-negative matrix factorization (multiplicative updates
on observed entries). All emitted scores are clamped to the 1-5 star range,
which keeps every weight strictly positive downstream.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataset import RATING_MAX, RATING_MIN, CandidateSets, RatingsDataset
from .errors import FactorizationError, InvalidInputError


@dataclass(frozen=True)
class KnnParams:
    """User-based KNN settings.

    n_neighbors bounds how many raters of an item are aggregated;
    min_overlap is the number of co-rated items two users need before
    their similarity counts.
    """

    n_neighbors: int = 40
    min_overlap: int = 1

    def __post_init__(self) -> None:
        if self.n_neighbors < 1:
            raise InvalidInputError("n_neighbors must be >= 1")
        if self.min_overlap < 1:
            raise InvalidInputError("min_overlap must be >= 1")

    def tag(self) -> str:
        return f"knn(n_neighbors={self.n_neighbors},min_overlap={self.min_overlap})"


@dataclass(frozen=True)
class NmfParams:
    """Non-negative factorization settings; training runs a fixed epoch budget."""

    n_factors: int = 15
    n_epochs: int = 50
    init_seed: int = 0

    def __post_init__(self) -> None:
        if self.n_factors < 1:
            raise InvalidInputError("n_factors must be >= 1")
        if self.n_epochs < 0:
            raise InvalidInputError("n_epochs must be >= 0")

    def tag(self) -> str:
        return (
            f"nmf(n_factors={self.n_factors},n_epochs={self.n_epochs},"
            f"seed={self.init_seed})"
        )


@dataclass
class ScoreGraph:
    """Predicted stars for every (user, candidate item) pair.

    items[u] holds the user's candidate ids in ascending order and
    scores[u] is aligned with it. Scores are finite and lie in [1, 5].
    Immutable after construction.
    """

    items: list[np.ndarray]
    scores: list[np.ndarray]
    n_items: int
    provenance: str = ""

    @property
    def n_users(self) -> int:
        return len(self.items)

    def lookup(self, user: int, item_ids: np.ndarray) -> np.ndarray:
        """Scores of the given candidate items for one user."""
        cand = self.items[user]
        item_ids = np.asarray(item_ids, dtype=np.int64)
        if item_ids.size == 0:
            return np.empty(0)
        if cand.size == 0:
            raise InvalidInputError(f"user {user} has no candidate items")
        pos = np.minimum(np.searchsorted(cand, item_ids), cand.size - 1)
        if np.any(cand[pos] != item_ids):
            raise InvalidInputError(f"item not in candidate set of user {user}")
        return self.scores[user][pos]

    @classmethod
    def from_pairs(
        cls,
        pairs_per_user: Sequence[Sequence[tuple[int, float]]],
        n_items: int,
        provenance: str = "",
    ) -> "ScoreGraph":
        """Build from unordered (item, score) pairs; order of pairs is irrelevant."""
        items: list[np.ndarray] = []
        scores: list[np.ndarray] = []
        for pairs in pairs_per_user:
            ids = np.asarray([p[0] for p in pairs], dtype=np.int64)
            vals = np.asarray([p[1] for p in pairs], dtype=np.float64)
            order = np.argsort(ids)
            ids, vals = ids[order], vals[order]
            if ids.size and np.any(ids[1:] == ids[:-1]):
                raise InvalidInputError("duplicate item within one user's pairs")
            items.append(ids)
            scores.append(vals)
        return cls(items=items, scores=scores, n_items=n_items, provenance=provenance)


def _clamp(scores: np.ndarray) -> np.ndarray:
    return np.clip(scores, RATING_MIN, RATING_MAX)


def predict_knn(
    dataset: RatingsDataset, candidates: CandidateSets, params: KnnParams = KnnParams()
) -> ScoreGraph:
    """Score each user's candidates with user-based KNN.

    For a target (u, i) the n_neighbors raters of i most similar to u
    (mean-centered cosine; ties broken by ascending user id; pairs with
    fewer than min_overlap co-rated items are excluded) contribute their
    deviation from their own mean, weighted by similarity and normalized
    by the sum of absolute similarities. Candidates with no usable rater,
    or a zero similarity mass, fall back to the user's mean rating.
    """
    n, m = dataset.n_users, dataset.n_items
    rated_values, observed = dataset.dense_matrix()
    counts = observed.sum(axis=1)
    means = rated_values.sum(axis=1) / counts

    deviations = np.where(observed, rated_values - means[:, None], 0.0)
    norms = np.sqrt((deviations**2).sum(axis=1))
    safe_norms = np.where(norms > 0, norms, 1.0)
    sims = (deviations @ deviations.T) / np.outer(safe_norms, safe_norms)

    overlap = observed.astype(np.float64) @ observed.T.astype(np.float64)
    valid = overlap >= params.min_overlap
    usable_sims = np.where(valid, sims, 0.0)
    # invalid pairs must rank below every valid similarity, including -1
    rank_keys = np.where(valid, sims, -2.0)

    by_item = np.lexsort((dataset.users, dataset.items))
    item_bounds = np.searchsorted(dataset.items[by_item], np.arange(m + 1))

    predictions = np.empty((n, m))
    nn = params.n_neighbors
    for i in range(m):
        raters = dataset.users[by_item[item_bounds[i] : item_bounds[i + 1]]]
        devs = deviations[raters, i]
        if raters.size <= nn:
            sim_block = usable_sims[:, raters]
            numer = sim_block @ devs
            denom = np.abs(sim_block).sum(axis=1)
        else:
            order = np.argsort(-rank_keys[:, raters], axis=1, kind="stable")[:, :nn]
            sim_sel = np.take_along_axis(usable_sims[:, raters], order, axis=1)
            numer = (sim_sel * devs[order]).sum(axis=1)
            denom = np.abs(sim_sel).sum(axis=1)
        safe = np.where(denom > 0, denom, 1.0)
        predictions[:, i] = np.where(denom > 0, means + numer / safe, means)

    predictions = _clamp(predictions)
    return ScoreGraph(
        items=[candidates[u] for u in range(n)],
        scores=[predictions[u, candidates[u]] for u in range(n)],
        n_items=m,
        provenance=params.tag(),
    )


def fit_nmf(
    dataset: RatingsDataset, params: NmfParams = NmfParams()
) -> tuple[np.ndarray, np.ndarray, list[float]]:
    """Train nonnegative factors P (users) and Q (items) by multiplicative updates.

    Only observed entries enter the squared-error objective. Returns the
    factors and the loss history (initial loss plus one value per epoch);
    the loss is non-increasing across epochs. Raises FactorizationError if
    the factors stop being finite.
    """
    rated_values, observed = dataset.dense_matrix()
    mask = observed.astype(np.float64)
    target = rated_values * mask

    rng = np.random.default_rng(params.init_seed)
    scale = np.sqrt(dataset.ratings.mean() / params.n_factors)
    p = rng.uniform(size=(dataset.n_users, params.n_factors)) * scale
    q = rng.uniform(size=(dataset.n_items, params.n_factors)) * scale

    eps = 1e-12
    losses = [float(((target - mask * (p @ q.T)) ** 2).sum())]
    for _ in range(params.n_epochs):
        p *= (target @ q) / ((mask * (p @ q.T)) @ q + eps)
        q *= (target.T @ p) / ((mask * (p @ q.T)).T @ p + eps)
        loss = float(((target - mask * (p @ q.T)) ** 2).sum())
        if not np.isfinite(loss):
            raise FactorizationError("factorization diverged to non-finite values")
        losses.append(loss)
    _check_finite(p)
    _check_finite(q)
    return p, q, losses


def _check_finite(factors: np.ndarray) -> None:
    if not np.all(np.isfinite(factors)):
        raise FactorizationError("factorization produced non-finite factors")


def predict_nmf(
    dataset: RatingsDataset, candidates: CandidateSets, params: NmfParams = NmfParams()
) -> ScoreGraph:
    """Score each user's candidates with the trained factor model."""
    p, q, _ = fit_nmf(dataset, params)
    full = _clamp(p @ q.T)
    return ScoreGraph(
        items=[candidates[u] for u in range(dataset.n_users)],
        scores=[full[u, candidates[u]] for u in range(dataset.n_users)],
        n_items=dataset.n_items,
        provenance=params.tag(),
    )


def save_score_cache(graph: ScoreGraph, dataset: RatingsDataset, path: str | Path) -> None:
    """Write the graph as CSV ``user,item,score`` (raw ids, 6 decimals)."""
    with open(path, "w", encoding="ascii", newline="") as handle:
        handle.write("user,item,score\n")
        for u in range(graph.n_users):
            raw_user = dataset.user_ids[u]
            for item, score in zip(graph.items[u], graph.scores[u]):
                handle.write(f"{raw_user},{dataset.item_ids[item]},{score:.6f}\n")


def load_score_cache(
    path: str | Path,
    dataset: RatingsDataset,
    candidates: CandidateSets,
    provenance: str = "cache",
) -> ScoreGraph:
    """Read a cached score file and check it against the current candidates."""
    per_user: list[list[tuple[int, float]]] = [[] for _ in range(dataset.n_users)]
    with open(path, "r", encoding="ascii", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != ["user", "item", "score"]:
            raise InvalidInputError(f"{path}: not a score cache file")
        for row in reader:
            if len(row) != 3:
                raise InvalidInputError(f"{path}: malformed cache row {row!r}")
            try:
                u = dataset.user_index[int(row[0])]
                i = dataset.item_index[int(row[1])]
                score = float(row[2])
            except (KeyError, ValueError):
                raise InvalidInputError(
                    f"{path}: cache row {row!r} does not match the loaded dataset"
                ) from None
            if not RATING_MIN <= score <= RATING_MAX:
                raise InvalidInputError(f"{path}: cached score {score} outside [1, 5]")
            per_user[u].append((i, score))

    graph = ScoreGraph.from_pairs(per_user, dataset.n_items, provenance=provenance)
    for u in range(dataset.n_users):
        if not np.array_equal(graph.items[u], candidates[u]):
            raise InvalidInputError(
                f"{path}: cached items for user {dataset.user_ids[u]} do not match "
                "the current candidate set (stale cache?)"
            )
    return graph
