"""Neighbor retrieval through the index: one query, two fields, one merge.

The encoded query is scored against PRATE (same-sign products) and NRATE
(opposite-sign products). Subtracting the NRATE score from the PRATE score
of each document gives the signed similarity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np

from .encoder import TermId, encode_query
from .index import InvertedIndex, query_norm, rank_all, rank_order
from .scorers import ScorerConfig


class ScoredNeighbor(NamedTuple):
    neighbor_id: int
    similarity: float


@dataclass(frozen=True)
class KnnConfig:
    k: int
    m: int = 10

    def __post_init__(self):
        if self.k < 1 or self.m < 1:
            raise ValueError("k and m must both be >= 1")

    @property
    def depth(self) -> int:
        return self.k * self.m


def _merge(pos_ids, pos_scores, neg_ids, neg_scores, k, qnorm=None):
    merged: dict[int, float] = dict(zip(pos_ids.tolist(), pos_scores.tolist()))
    for d, x in zip(neg_ids.tolist(), neg_scores.tolist()):
        merged[d] = merged.get(d, 0.0) - x
    if not merged:
        return []
    ids = np.fromiter(merged.keys(), dtype=np.int64, count=len(merged))
    sims = np.fromiter(merged.values(), dtype=float, count=len(merged))
    if qnorm is not None:
        sims = sims / qnorm
    order = rank_order(ids, sims)[:k]
    return [ScoredNeighbor(int(ids[i]), float(sims[i])) for i in order]


def knn_terms(
    index: InvertedIndex,
    query: Mapping[TermId, int],
    config: KnnConfig,
    scorer: ScorerConfig | None = None,
    exclude_self: int | None = None,
    normalize_query: bool = False,
) -> list[ScoredNeighbor]:
    """Run the PRATE/NRATE query pair for an already encoded query."""
    return knn_sweep(index, query, [config.k], config.m, scorer, exclude_self, normalize_query)[config.k]


def knn_sweep(
    index: InvertedIndex,
    query: Mapping[TermId, int],
    k_values,
    m: int = 10,
    scorer: ScorerConfig | None = None,
    exclude_self: int | None = None,
    normalize_query: bool = False,
) -> dict[int, list[ScoredNeighbor]]:
    """``knn_terms`` for several k at once, scoring each field only once.

    Each k still merges only the top ``k * m`` hits of each field, so the
    result for every k equals a separate ``knn_terms`` call.
    """
    for k in k_values:
        KnnConfig(k, m)
    if not query:
        return {k: [] for k in k_values}
    scorer = scorer or ScorerConfig()
    p_ids, p_sc = rank_all(index, "PRATE", query, scorer, exclude_self)
    n_ids, n_sc = rank_all(index, "NRATE", query, scorer, exclude_self)
    qnorm = query_norm(query) if normalize_query else None
    out = {}
    for k in k_values:
        d = k * m
        out[k] = _merge(p_ids[:d], p_sc[:d], n_ids[:d], n_sc[:d], k, qnorm)
    return out


def knn(
    index: InvertedIndex,
    query_profile,
    query_mean: float,
    config: KnnConfig,
    scorer: ScorerConfig | None = None,
    exclude_self: int | None = None,
    normalize_query: bool = False,
) -> list[ScoredNeighbor]:
    """Top-k neighbors of a rating profile by merged PRATE - NRATE score.

    Scores are left unnormalized by the query norm unless
    ``normalize_query`` is set; the prediction formulas are invariant to
    that constant. An empty result means the profile encodes to no terms.
    """
    query = encode_query(query_profile, query_mean, index.scale_factor)
    return knn_terms(index, query, config, scorer, exclude_self, normalize_query)


def knn_exhaustive(dataset, means, query_id: int, mode: str, k: int) -> list[ScoredNeighbor]:
    """Exact adjusted-cosine top-k over all candidates (reference for :func:`knn`).

    Candidates with no co-rated ids are dropped.
    """
    from .baselines import BruteForce, rank_neighbors

    bf = BruteForce(dataset, means, mode)
    ids, scores = bf.scores(query_id, "acs")
    r = bf.view.row_of[int(query_id)]
    shared = (bf.W @ bf.W[r]) > 0
    return rank_neighbors(ids[shared], scores[shared], k, exclude=query_id)
