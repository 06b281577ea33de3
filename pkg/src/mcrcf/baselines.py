"""Exact pairwise similarities and brute-force neighbor search.

Profiles are ``{id: rating}`` mappings: a user's items in user-based mode,
an item's users in item-based mode. Degenerate similarities (no co-rated
ids, or a centered vector that vanishes on the overlap) are 0; pass
``return_flag=True`` to also get whether the value was defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import AbstractSet, Mapping

import numpy as np

from .index import rank_order
from .knn import ScoredNeighbor
from .ratings import MeansTable, RatingsDataset

SIMILARITIES = ("pearson", "acs", "wacs")

Profile = Mapping[int, float]


@dataclass(frozen=True)
class CoRatedStats:
    overlap: frozenset[int]
    pair_mean_left: float
    pair_mean_right: float


def co_rated_stats(left: Profile, right: Profile) -> CoRatedStats:
    overlap = frozenset(left.keys() & right.keys())
    if not overlap:
        return CoRatedStats(overlap, math.nan, math.nan)
    n = len(overlap)
    return CoRatedStats(
        overlap,
        math.fsum(left[i] for i in overlap) / n,
        math.fsum(right[i] for i in overlap) / n,
    )


def _centered_cosine(left, right, overlap, lmean, rmean):
    ids = sorted(overlap)
    a = [left[i] - lmean for i in ids]
    b = [right[i] - rmean for i in ids]
    na = math.fsum(x * x for x in a)
    nb = math.fsum(x * x for x in b)
    if na == 0 or nb == 0:
        return 0.0, False
    val = math.fsum(x * y for x, y in zip(a, b)) / math.sqrt(na * nb)
    return max(-1.0, min(1.0, val)), True


def pearson(left: Profile, right: Profile, return_flag: bool = False):
    """Correlation over co-rated ids, each side centered by its pairwise mean."""
    st = co_rated_stats(left, right)
    if len(st.overlap) < 2:
        val, ok = 0.0, False
    else:
        val, ok = _centered_cosine(left, right, st.overlap, st.pair_mean_left, st.pair_mean_right)
    return (val, ok) if return_flag else val


def acs(
    left: Profile,
    right: Profile,
    left_mean: float,
    right_mean: float,
    return_flag: bool = False,
):
    """Adjusted cosine: co-rated ratings centered by each side's global mean."""
    overlap = left.keys() & right.keys()
    if not overlap:
        val, ok = 0.0, False
    else:
        val, ok = _centered_cosine(left, right, overlap, left_mean, right_mean)
    return (val, ok) if return_flag else val


def jaccard(left: AbstractSet, right: AbstractSet) -> float:
    union = len(left | right)
    return len(left & right) / union if union else 0.0


def wacs(left: Profile, right: Profile, left_mean: float, right_mean: float) -> float:
    """Adjusted cosine weighted by the Jaccard index of the two supports."""
    return acs(left, right, left_mean, right_mean) * jaccard(left.keys(), right.keys())


class BruteForce:
    """Exhaustive similarity of one entity against every other, on dense arrays.

    Precomputes the centered rating matrix once so that repeated queries
    against the same training data cost a handful of matrix-vector products.
    """

    def __init__(self, dataset: RatingsDataset, means: MeansTable, mode: str):
        view = dataset.dense(mode)
        self.mode = mode
        self.view = view
        mu = np.array([means.of(mode)[int(i)] for i in view.ids])
        self.X = view.values
        self.W = view.mask.astype(float)
        self.C = (self.X - mu[:, None]) * self.W
        self.C2 = self.C * self.C
        self.X2 = self.X * self.X
        self.sizes = self.W.sum(axis=1)

    def scores(self, query_id: int, similarity: str = "acs") -> tuple[np.ndarray, np.ndarray]:
        """Similarities of every entity to ``query_id`` (query included)."""
        return self.all_scores(query_id, (similarity,))[similarity]

    def all_scores(self, query_id: int, similarities=SIMILARITIES) -> dict:
        r = self.view.row_of[int(query_id)]
        wq, xq, cq = self.W[r], self.X[r], self.C[r]
        n = self.W @ wq
        out = {}
        ids = self.view.ids
        if "acs" in similarities or "wacs" in similarities:
            num = self.C @ cq
            den2 = (self.W @ (cq * cq)) * (self.C2 @ wq)
            with np.errstate(invalid="ignore", divide="ignore"):
                a = np.where((n > 0) & (den2 > 0), num / np.sqrt(den2), 0.0)
            a = np.clip(a, -1.0, 1.0)
            if "acs" in similarities:
                out["acs"] = (ids, a)
            if "wacs" in similarities:
                union = self.sizes + self.sizes[r] - n
                out["wacs"] = (ids, a * np.where(union > 0, n / np.maximum(union, 1), 0.0))
        if "pearson" in similarities:
            sx = self.X @ wq
            sq = self.W @ xq
            with np.errstate(invalid="ignore", divide="ignore"):
                sxx = self.X2 @ wq
                sqq = self.W @ (xq * xq)
                cov = self.X @ xq - sx * sq / n
                vx = sxx - sx * sx / n
                vq = sqq - sq * sq / n
                # cancellation leaves ~1e-13 residue where the true variance is 0
                ok = (n >= 2) & (vx > 1e-9 * np.maximum(1.0, sxx)) & (vq > 1e-9 * np.maximum(1.0, sqq))
                p = np.where(ok, cov / np.sqrt(np.where(ok, vx * vq, 1.0)), 0.0)
            out["pearson"] = (ids, np.clip(p, -1.0, 1.0))
        return out

    def knn(self, query_id: int, k: int, similarity: str = "acs") -> list[ScoredNeighbor]:
        ids, s = self.scores(query_id, similarity)
        return rank_neighbors(ids, s, k, exclude=query_id)


def rank_neighbors(ids: np.ndarray, scores: np.ndarray, k: int, exclude=None) -> list[ScoredNeighbor]:
    """Top ``k`` by score descending, ties by ascending id."""
    if exclude is not None:
        keep = ids != exclude
        ids, scores = ids[keep], scores[keep]
    order = rank_order(ids, scores)[:k]
    return [ScoredNeighbor(int(ids[i]), float(scores[i])) for i in order]


def brute_knn(
    dataset: RatingsDataset,
    means: MeansTable,
    query_id: int,
    mode: str,
    k: int,
    similarity: str = "acs",
) -> list[ScoredNeighbor]:
    """Score every candidate against ``query_id`` and keep the best ``k``."""
    if similarity not in SIMILARITIES:
        raise ValueError(f"unknown similarity {similarity!r}; expected one of {SIMILARITIES}")
    if int(query_id) not in dataset.profiles(mode):
        raise KeyError(f"{query_id} not in dataset ({mode})")
    return BruteForce(dataset, means, mode).knn(query_id, k, similarity)
