"""Synthetic rating corpora for oracle checks and timing."""

from __future__ import annotations

import numpy as np

from .ratings import ML100K_SCALE, RatingRecord, RatingsDataset


def exact_mcr_corpus(n_users: int = 200, n_items: int = 100, seed: int = 0) -> RatingsDataset:
    """Every user rates every item with an integer 1..5.

    With ``n_items = 100`` each user mean is a multiple of 0.01, so every
    user-side mean-centered rate is exactly representable at scale 100.
    Full overlap also makes the cosine over whole profiles coincide with
    the cosine over co-rated items.
    """
    rng = np.random.default_rng(seed)
    # per-user bias keeps means spread out and users distinguishable
    bias = rng.integers(-1, 2, size=n_users)
    r = np.clip(rng.integers(1, 6, size=(n_users, n_items)) + bias[:, None], 1, 5)
    recs = [
        RatingRecord(u + 1, i + 1, float(r[u, i]), 0)
        for u in range(n_users)
        for i in range(n_items)
    ]
    return RatingsDataset(recs, ML100K_SCALE)


def sparse_corpus(
    n_users: int = 10_000,
    n_items: int = 1_000,
    ratings_per_user: int = 40,
    seed: int = 0,
) -> RatingsDataset:
    """Sparse integer ratings with Zipf-like item popularity."""
    rng = np.random.default_rng(seed)
    pop = 1.0 / np.arange(1, n_items + 1) ** 0.8
    pop /= pop.sum()
    taste = rng.normal(0, 1, size=(n_users, 4))
    style = rng.normal(0, 1, size=(n_items, 4))
    recs = []
    for u in range(n_users):
        items = rng.choice(n_items, size=ratings_per_user, replace=False, p=pop)
        raw = 3 + 0.6 * style[items] @ taste[u] + rng.normal(0, 0.8, size=len(items))
        for i, x in zip(items, np.clip(np.rint(raw), 1, 5)):
            recs.append(RatingRecord(u + 1, int(i) + 1, float(x), 0))
    return RatingsDataset(recs, ML100K_SCALE)
