"""Rating prediction: base estimate plus similarity-weighted neighbor deviations."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .knn import ScoredNeighbor
from .ratings import MeansTable, RatingScale, RatingsDataset


@dataclass(frozen=True)
class Prediction:
    value: float
    rounded: float
    source: str  # "full" or "base_only"
    neighbor_count_used: int


def round_to_scale(value: float, scale: RatingScale) -> float:
    """Clamp into the scale, then snap to the nearest step (halves go up)."""
    v = min(max(value, scale.min), scale.max)
    steps = math.floor((v - scale.min) / scale.step + 0.5)
    return min(scale.min + steps * scale.step, scale.max)


def round_array(values, scale: RatingScale) -> np.ndarray:
    """Vectorized :func:`round_to_scale`."""
    v = np.clip(np.asarray(values, dtype=float), scale.min, scale.max)
    steps = np.floor((v - scale.min) / scale.step + 0.5)
    return np.minimum(scale.min + steps * scale.step, scale.max)


def weighted_deviation(base: float, pairs) -> tuple[float, int] | None:
    """``base + sum(s * d) / sum(|s|)`` over (similarity, deviation) pairs.

    Returns ``None`` when there is nothing to average.
    """
    pairs = list(pairs)
    den = math.fsum(abs(s) for s, _ in pairs)
    if not pairs or den == 0:
        return None
    return base + math.fsum(s * d for s, d in pairs) / den, len(pairs)


def _finish(base, result, scale):
    if result is None:
        return Prediction(base, round_to_scale(base, scale), "base_only", 0)
    value, used = result
    return Prediction(value, round_to_scale(value, scale), "full", used)


def predict_user_based(
    a: int,
    j: int,
    neighbors: Sequence[ScoredNeighbor],
    train: RatingsDataset,
    means: MeansTable,
) -> Prediction:
    base = means.user_mean.get(a, means.global_mean)
    pairs = []
    for u, sim in neighbors:
        r = train.by_user.get(u, {}).get(j)
        if r is not None:
            pairs.append((sim, r - means.user_mean[u]))
    return _finish(base, weighted_deviation(base, pairs), train.scale)


def predict_item_based(
    a: int,
    i: int,
    neighbors: Sequence[ScoredNeighbor],
    train: RatingsDataset,
    means: MeansTable,
) -> Prediction:
    base = means.item_mean.get(i, means.global_mean)
    rated = train.by_user.get(a, {})
    pairs = []
    for j, sim in neighbors:
        r = rated.get(j)
        if r is not None:
            pairs.append((sim, r - means.item_mean[j]))
    return _finish(base, weighted_deviation(base, pairs), train.scale)


def predict(mode: str, user: int, item: int, neighbors, train, means) -> Prediction:
    if mode == "user_based":
        return predict_user_based(user, item, neighbors, train, means)
    return predict_item_based(user, item, neighbors, train, means)
