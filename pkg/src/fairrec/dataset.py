"""MovieLens-format ratings: parsing, the rating matrix, per-user candidate sets.

The input format is one rating per line, ``user item rating timestamp``,
separated by tabs or single spaces. Timestamps are discarded. Raw file ids
are remapped to dense 0-based ids (assigned in ascending raw-id order, so
the mapping does not depend on line order); downstream code works with
dense ids only and reports translate back to raw ids.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator

import numpy as np

from .errors import (
    CandidateShortfallError,
    DuplicateRatingError,
    RatingParseError,
    RatingRangeError,
)

RATING_MIN = 1.0
RATING_MAX = 5.0


@dataclass
class RatingsDataset:
    """Sparse user-item rating matrix with raw/dense id maps.

    Immutable after construction and safe to share across threads. Every
    user and every item carries at least one rating, because ids exist only
    through observed ratings.
    """

    n_users: int
    n_items: int
    users: np.ndarray  # dense user id per rating
    items: np.ndarray  # dense item id per rating
    ratings: np.ndarray  # stars in [1, 5], float64
    user_ids: np.ndarray  # dense -> raw
    item_ids: np.ndarray  # dense -> raw
    user_index: dict[int, int]  # raw -> dense
    item_index: dict[int, int]  # raw -> dense
    _rated: list[np.ndarray] = field(default_factory=list, repr=False)

    def __post_init__(self) -> None:
        if not self._rated:
            order = np.lexsort((self.items, self.users))
            bounds = np.searchsorted(self.users[order], np.arange(self.n_users + 1))
            self._rated = [
                self.items[order[bounds[u] : bounds[u + 1]]]
                for u in range(self.n_users)
            ]

    @property
    def n_ratings(self) -> int:
        return self.ratings.size

    def rated_items(self, user: int) -> np.ndarray:
        """Dense ids of the items this user has rated, ascending."""
        return self._rated[user]

    def dense_matrix(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (ratings, observed-mask) as dense (n_users, n_items) arrays."""
        r = np.zeros((self.n_users, self.n_items))
        r[self.users, self.items] = self.ratings
        mask = np.zeros((self.n_users, self.n_items), dtype=bool)
        mask[self.users, self.items] = True
        return r, mask


@dataclass
class CandidateSets:
    """Per-user ascending item ids the user has not rated."""

    sets: list[np.ndarray]
    n_items: int

    def __len__(self) -> int:
        return len(self.sets)

    def __getitem__(self, user: int) -> np.ndarray:
        return self.sets[user]


def _iter_lines(source: str | Path | IO[str] | Iterable[str]) -> Iterator[str]:
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="ascii") as handle:
            yield from handle
    else:
        yield from source


def parse_ratings(source: str | Path | IO[str] | Iterable[str]) -> RatingsDataset:
    """Parse ``user item rating timestamp`` lines into a RatingsDataset.

    Accepts a path, an open text stream, or any iterable of lines. Raises
    RatingParseError for malformed lines, RatingRangeError for ratings
    outside 1-5, and DuplicateRatingError for repeated (user, item) pairs.
    """
    raw_users: list[int] = []
    raw_items: list[int] = []
    values: list[float] = []
    seen: set[tuple[int, int]] = set()

    try:
        for line_no, line in enumerate(_iter_lines(source), start=1):
            if not line.strip():
                continue
            fields = line.split()
            if len(fields) != 4:
                raise RatingParseError(
                    f"line {line_no}: expected 4 fields (user item rating timestamp), "
                    f"got {len(fields)}"
                )
            try:
                user = int(fields[0])
                item = int(fields[1])
            except ValueError:
                raise RatingParseError(
                    f"line {line_no}: non-numeric user or item id"
                ) from None
            try:
                rating = int(fields[2])
            except ValueError:
                raise RatingParseError(
                    f"line {line_no}: rating must be an integer, got {fields[2]!r}"
                ) from None
            if not RATING_MIN <= rating <= RATING_MAX:
                raise RatingRangeError(
                    f"line {line_no}: rating {rating} outside [1, 5]"
                )
            if (user, item) in seen:
                raise DuplicateRatingError(
                    f"line {line_no}: duplicate rating for user {user}, item {item}"
                )
            seen.add((user, item))
            raw_users.append(user)
            raw_items.append(item)
            values.append(float(rating))
    except UnicodeDecodeError as exc:
        raise RatingParseError(f"ratings source is not ASCII text: {exc}") from None

    if not values:
        raise RatingParseError("no ratings found in source")

    raw_u = np.asarray(raw_users, dtype=np.int64)
    raw_i = np.asarray(raw_items, dtype=np.int64)
    user_ids = np.unique(raw_u)
    item_ids = np.unique(raw_i)
    user_index = {int(raw): dense for dense, raw in enumerate(user_ids)}
    item_index = {int(raw): dense for dense, raw in enumerate(item_ids)}

    return RatingsDataset(
        n_users=user_ids.size,
        n_items=item_ids.size,
        users=np.searchsorted(user_ids, raw_u),
        items=np.searchsorted(item_ids, raw_i),
        ratings=np.asarray(values),
        user_ids=user_ids,
        item_ids=item_ids,
        user_index=user_index,
        item_index=item_index,
    )


def load_ratings(path: str | Path) -> RatingsDataset:
    """Parse a ratings file from disk."""
    return parse_ratings(Path(path))


def write_ratings(dataset: RatingsDataset, destination: str | Path | IO[str]) -> None:
    """Serialize back to the line format with raw ids (timestamps become 0)."""
    lines = (
        f"{dataset.user_ids[u]}\t{dataset.item_ids[i]}\t{int(r)}\t0\n"
        for u, i, r in zip(dataset.users, dataset.items, dataset.ratings)
    )
    if isinstance(destination, (str, Path)):
        with open(destination, "w", encoding="ascii") as handle:
            handle.writelines(lines)
    else:
        destination.writelines(lines)


def candidate_sets(dataset: RatingsDataset, min_size: int | None = None) -> CandidateSets:
    """Complement of each user's rated items, sorted ascending.

    If min_size is given, reject any user with fewer candidates than that
    (the recommendation list size k cannot be met for them).
    """
    sets: list[np.ndarray] = []
    for u in range(dataset.n_users):
        mask = np.ones(dataset.n_items, dtype=bool)
        mask[dataset.rated_items(u)] = False
        cand = np.flatnonzero(mask)
        if min_size is not None and cand.size < min_size:
            raise CandidateShortfallError(
                f"user {dataset.user_ids[u]} has only {cand.size} unrated items, "
                f"fewer than the requested list size {min_size}"
            )
        sets.append(cand)
    return CandidateSets(sets=sets, n_items=dataset.n_items)
