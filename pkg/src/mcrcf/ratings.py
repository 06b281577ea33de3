"""Rating data: loading, splitting, global means and mean-centered rates."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Mapping, NamedTuple

import numpy as np

FORMATS = ("ml100k", "ml1m_10m", "csv")
CSV_HEADER = ["user_id", "item_id", "rating", "timestamp"]


class RatingsError(ValueError):
    """Raised for malformed, duplicated or off-scale rating data."""


@dataclass(frozen=True)
class RatingScale:
    min: float
    max: float
    step: float

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError(f"step must be positive, got {self.step}")
        if self.max < self.min:
            raise ValueError("max must not be below min")
        n = (self.max - self.min) / self.step
        if abs(n - round(n)) > 1e-9:
            raise ValueError("(max - min) must be an integer multiple of step")

    def contains(self, rating: float) -> bool:
        if not (self.min - 1e-9 <= rating <= self.max + 1e-9):
            return False
        n = (rating - self.min) / self.step
        return abs(n - round(n)) <= 1e-9

    @classmethod
    def parse(cls, text: str) -> "RatingScale":
        """Parse ``"min:max:step"``, e.g. ``"0.5:5:0.5"``."""
        try:
            lo, hi, step = (float(p) for p in text.split(":"))
        except ValueError:
            raise ValueError(f"scale must look like 'min:max:step', got {text!r}") from None
        return cls(lo, hi, step)


ML100K_SCALE = RatingScale(1.0, 5.0, 1.0)
ML10M_SCALE = RatingScale(0.5, 5.0, 0.5)


class RatingRecord(NamedTuple):
    user_id: int
    item_id: int
    rating: float
    timestamp: int = 0


class RatingsDataset:
    """Sparse user x item rating matrix with both row and column views.

    ``by_user[u]`` maps item -> rating (the set S_u with its ratings) and
    ``by_item[i]`` maps user -> rating (S_i). Treat instances as immutable.
    """

    def __init__(self, records: Iterable[RatingRecord], scale: RatingScale):
        self.scale = scale
        self.records: tuple[RatingRecord, ...] = tuple(records)
        by_user: dict[int, dict[int, float]] = {}
        by_item: dict[int, dict[int, float]] = {}
        for rec in self.records:
            row = by_user.setdefault(rec.user_id, {})
            if rec.item_id in row:
                raise RatingsError(
                    f"duplicate rating for user {rec.user_id}, item {rec.item_id}"
                )
            if not scale.contains(rec.rating):
                raise RatingsError(
                    f"rating {rec.rating} for user {rec.user_id}, item {rec.item_id} "
                    f"is not on scale {scale}"
                )
            row[rec.item_id] = rec.rating
            by_item.setdefault(rec.item_id, {})[rec.user_id] = rec.rating
        self.by_user = by_user
        self.by_item = by_item

    @property
    def users(self) -> frozenset[int]:
        return frozenset(self.by_user)

    @property
    def items(self) -> frozenset[int]:
        return frozenset(self.by_item)

    def __len__(self) -> int:
        return len(self.records)

    def __repr__(self) -> str:
        return (
            f"RatingsDataset(ratings={len(self)}, users={len(self.by_user)}, "
            f"items={len(self.by_item)}, scale={self.scale})"
        )

    def triples(self) -> Iterator[tuple[int, int, float]]:
        for rec in self.records:
            yield rec.user_id, rec.item_id, rec.rating

    def rating(self, user_id: int, item_id: int) -> float | None:
        return self.by_user.get(user_id, {}).get(item_id)

    def profiles(self, mode: str) -> Mapping[int, Mapping[int, float]]:
        """Rows for ``user_based`` (user -> items), columns for ``item_based``."""
        if mode == "user_based":
            return self.by_user
        if mode == "item_based":
            return self.by_item
        raise ValueError(f"unknown mode {mode!r}")

    def dense(self, mode: str) -> "DenseView":
        return self._dense_views[mode]

    @cached_property
    def _dense_views(self) -> dict[str, "DenseView"]:
        return {m: DenseView.from_profiles(self.profiles(m)) for m in ("user_based", "item_based")}


@dataclass(frozen=True)
class DenseView:
    """Dense (entities x features) ratings with a presence mask.

    ``values`` holds 0 where no rating exists; ``mask`` marks observed cells.
    """

    ids: np.ndarray
    feature_ids: np.ndarray
    values: np.ndarray
    mask: np.ndarray
    row_of: dict[int, int] = field(repr=False)
    col_of: dict[int, int] = field(repr=False)

    @classmethod
    def from_profiles(cls, profiles: Mapping[int, Mapping[int, float]]) -> "DenseView":
        ids = np.array(sorted(profiles), dtype=np.int64)
        feats = np.array(sorted({f for p in profiles.values() for f in p}), dtype=np.int64)
        row_of = {int(x): r for r, x in enumerate(ids)}
        col_of = {int(x): c for c, x in enumerate(feats)}
        values = np.zeros((len(ids), len(feats)))
        mask = np.zeros((len(ids), len(feats)), dtype=bool)
        for ent, prof in profiles.items():
            r = row_of[ent]
            cols = [col_of[f] for f in prof]
            values[r, cols] = list(prof.values())
            mask[r, cols] = True
        return cls(ids, feats, values, mask, row_of, col_of)


@dataclass(frozen=True)
class MeansTable:
    user_mean: Mapping[int, float]
    item_mean: Mapping[int, float]
    global_mean: float

    def of(self, mode: str) -> Mapping[int, float]:
        """Means of the document entities for ``mode`` (users or items)."""
        return self.user_mean if mode == "user_based" else self.item_mean


@dataclass(frozen=True)
class SplitPair:
    train: RatingsDataset
    test: list[RatingRecord]
    seed: int
    train_fraction: float


def _parse_line(parts: list[str], lineno: int, path) -> RatingRecord:
    if len(parts) != 4:
        raise RatingsError(f"{path}:{lineno}: expected 4 fields, got {len(parts)}")
    try:
        return RatingRecord(int(parts[0]), int(parts[1]), float(parts[2]), int(float(parts[3])))
    except ValueError as exc:
        raise RatingsError(f"{path}:{lineno}: {exc}") from None


def _read_records(path: Path, fmt: str) -> Iterator[RatingRecord]:
    if fmt == "csv":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != CSV_HEADER:
                raise RatingsError(f"{path}:1: header must be {','.join(CSV_HEADER)}")
            for row in reader:
                if not row:
                    continue
                yield _parse_line(row, reader.line_num, path)
        return
    sep = "\t" if fmt == "ml100k" else "::"
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            yield _parse_line(line.split(sep), lineno, path)


def load_ratings(path, format: str = "ml100k", scale: RatingScale | None = None) -> RatingsDataset:
    """Load a ratings file.

    ``ml100k`` is tab separated, ``ml1m_10m`` uses ``::`` and ``csv`` needs a
    ``user_id,item_id,rating,timestamp`` header plus an explicit ``scale``.
    """
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")
    if scale is None:
        if format == "csv":
            raise ValueError("csv input requires an explicit rating scale")
        scale = ML100K_SCALE if format == "ml100k" else ML10M_SCALE
    path = Path(path)
    return RatingsDataset(_read_records(path, format), scale)


def split(dataset: RatingsDataset, train_fraction: float, seed: int) -> SplitPair:
    """Uniform random train/test partition of the rating records.

    Uses numpy's PCG64 generator (``default_rng(seed)``) to permute records
    in load order; the first ``round(train_fraction * n)`` go to train.
    """
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    n = len(dataset)
    if n == 0:
        raise RatingsError("cannot split an empty dataset")
    perm = np.random.default_rng(seed).permutation(n)
    cut = int(round(train_fraction * n))
    recs = dataset.records
    train = RatingsDataset((recs[i] for i in sorted(perm[:cut])), dataset.scale)
    test = [recs[i] for i in sorted(perm[cut:])]
    return SplitPair(train, test, seed, train_fraction)


def compute_means(dataset: RatingsDataset) -> MeansTable:
    if len(dataset) == 0:
        raise RatingsError("cannot compute means of an empty dataset")
    # math.fsum keeps the means independent of record order
    user_mean = {u: math.fsum(p.values()) / len(p) for u, p in dataset.by_user.items()}
    item_mean = {i: math.fsum(p.values()) / len(p) for i, p in dataset.by_item.items()}
    global_mean = math.fsum(r.rating for r in dataset.records) / len(dataset)
    return MeansTable(user_mean, item_mean, global_mean)


def mcr(rating: float, mean: float) -> float:
    """Mean-centered rate: signed deviation of ``rating`` from ``mean``."""
    return rating - mean
