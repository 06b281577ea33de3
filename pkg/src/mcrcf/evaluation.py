"""Repeated-split MAE experiments over modes, similarities and neighborhood sizes."""

from __future__ import annotations

import csv
import dataclasses
import logging
import time
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .baselines import SIMILARITIES as BRUTE_SIMILARITIES
from .baselines import BruteForce
from .encoder import encode_profile, encode_query
from .index import InvertedIndex, build_index, rank_order
from .knn import ScoredNeighbor, knn_sweep
from .predictor import round_array
from .ratings import (
    MeansTable,
    RatingRecord,
    RatingScale,
    RatingsDataset,
    SplitPair,
    compute_means,
    load_ratings,
    split,
)
from .scorers import KINDS as INDEX_SIMILARITIES
from .scorers import ScorerConfig

log = logging.getLogger(__name__)

SIMILARITIES = INDEX_SIMILARITIES + BRUTE_SIMILARITIES
BASELINE = "mean"
REPORT_HEADER = ["mode", "similarity", "k", "mae_mean", "mae_std", "coverage", "splits"]


@dataclass
class ExperimentConfig:
    dataset_path: str | Path | None = None
    dataset_format: str = "ml100k"
    modes: Sequence[str] = ("user_based", "item_based")
    similarities: Sequence[str] = ("tf",)
    k_values: Sequence[int] = (10,)
    m: int = 10
    scale_factor: int = 100
    split_count: int = 10
    train_fraction: float = 0.8
    base_seed: int = 0
    rounding: str = "rounded"
    include_baseline: bool = True
    scorer: ScorerConfig = field(default_factory=ScorerConfig)
    scale: RatingScale | None = None

    def __post_init__(self):
        if not self.modes or not self.similarities or not self.k_values:
            raise ValueError("modes, similarities and k_values must be nonempty")
        for mode in self.modes:
            if mode not in ("user_based", "item_based"):
                raise ValueError(f"unknown mode {mode!r}")
        for s in self.similarities:
            if s not in SIMILARITIES:
                raise ValueError(f"unknown similarity {s!r}; expected one of {SIMILARITIES}")
        if any(k < 1 for k in self.k_values):
            raise ValueError("k values must be positive")
        self.k_values = tuple(sorted(self.k_values))
        if self.m < 1 or self.split_count < 1:
            raise ValueError("m and split_count must be positive")
        if self.rounding not in ("rounded", "raw"):
            raise ValueError("rounding must be 'rounded' or 'raw'")


@dataclass(frozen=True)
class EvalRow:
    mode: str
    similarity: str
    k: int
    mae_mean: float
    mae_std: float
    coverage: float
    splits: int


@dataclass
class EvalReport:
    rows: list[EvalRow]
    per_split: dict[tuple[str, str, int], list[float]] = field(default_factory=dict)

    def get(self, mode: str, similarity: str, k: int) -> EvalRow:
        for r in self.rows:
            if (r.mode, r.similarity, r.k) == (mode, similarity, k):
                return r
        raise KeyError((mode, similarity, k))


def mae(predictions: Sequence[float], truths: Sequence[float]) -> float:
    p = np.asarray(predictions, dtype=float)
    t = np.asarray(truths, dtype=float)
    if p.shape != t.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {t.shape}")
    if p.size == 0:
        raise ValueError("mae of an empty list")
    return float(np.abs(p - t).mean())


def build_mode_index(train: RatingsDataset, means: MeansTable, mode: str, scale_factor: int) -> InvertedIndex:
    """Encode every row (or column) of ``train`` and index the documents."""
    mean_of = means.of(mode)
    docs = [
        encode_profile(doc_id, prof, mean_of[doc_id], scale_factor)
        for doc_id, prof in train.profiles(mode).items()
    ]
    return build_index(docs, mode, scale_factor)


class _Predictor:
    """Vectorized form of the prediction formulas for a whole test set.

    In either mode, a test pair is (entity, target): (user, item) for
    user-based, (item, user) for item-based. Neighbors are entities, and
    their deviations on the target come from the dense training view.
    """

    def __init__(self, train: RatingsDataset, means: MeansTable, mode: str, test: Sequence[RatingRecord]):
        self.view = train.dense(mode)
        self.mode = mode
        self.scale = train.scale
        mean_of = means.of(mode)
        self.mu = np.array([mean_of[int(i)] for i in self.view.ids])
        self.dev = (self.view.values - self.mu[:, None]) * self.view.mask
        if mode == "user_based":
            pairs = [(r.user_id, r.item_id) for r in test]
        else:
            pairs = [(r.item_id, r.user_id) for r in test]
        self.truth = np.array([r.rating for r in test])
        self.groups: dict[int, tuple[list[int], list[int]]] = defaultdict(lambda: ([], []))
        for pos, (ent, tgt) in enumerate(pairs):
            g = self.groups[ent]
            g[0].append(pos)
            g[1].append(self.view.col_of.get(tgt, -1))
        self.base = np.array(
            [mean_of.get(ent, means.global_mean) for ent, _ in pairs], dtype=float
        )

    @property
    def entities(self) -> list[int]:
        """Test entities present in training, i.e. those that can have neighbors."""
        return sorted(e for e in self.groups if e in self.view.row_of)

    def run(self, neighbors: dict[int, list[ScoredNeighbor]]):
        value = self.base.copy()
        full = np.zeros(len(value), dtype=bool)
        row_of = self.view.row_of
        for ent, nbrs in neighbors.items():
            if not nbrs or ent not in self.groups:
                continue
            positions, cols = self.groups[ent]
            cols = np.asarray(cols)
            ok = cols >= 0
            if not ok.any():
                continue
            pos = np.asarray(positions)[ok]
            rows = np.array([row_of[n.neighbor_id] for n in nbrs])
            sims = np.array([n.similarity for n in nbrs])
            present = self.view.mask[np.ix_(rows, cols[ok])]
            num = sims @ self.dev[np.ix_(rows, cols[ok])]
            den = np.abs(sims) @ present
            has = den > 0
            value[pos[has]] = self.base[pos[has]] + num[has] / den[has]
            full[pos[has]] = True
        return value, full

    def score(self, value: np.ndarray, rounding: str) -> float:
        if rounding == "rounded":
            value = round_array(value, self.scale)
        return mae(value, self.truth)


def _index_neighbors(index, train, means, mode, entities, k_values, m, scorer):
    profiles = train.profiles(mode)
    mean_of = means.of(mode)
    out = {k: {} for k in k_values}
    for e in entities:
        q = encode_query(profiles[e], mean_of[e], index.scale_factor)
        for k, nbrs in knn_sweep(index, q, k_values, m, scorer, exclude_self=e).items():
            out[k][e] = nbrs
    return out


def _brute_neighbors(train, means, mode, entities, sims, kmax):
    bf = BruteForce(train, means, mode)
    out = {s: {} for s in sims}
    for e in entities:
        scores = bf.all_scores(e, sims)
        for s in sims:
            ids, vals = scores[s]
            keep = ids != e
            ids, vals = ids[keep], vals[keep]
            order = rank_order(ids, vals)[:kmax]
            out[s][e] = [ScoredNeighbor(int(ids[i]), float(vals[i])) for i in order]
    return out


def evaluate_split(pair: SplitPair, config: ExperimentConfig) -> dict[tuple[str, str, int], tuple[float, float]]:
    """MAE and coverage for every (mode, similarity, k) on one split.

    Means, index and neighbor search see only ``pair.train``.
    """
    train, test = pair.train, pair.test
    means = compute_means(train)
    results = {}
    for mode in config.modes:
        pred = _Predictor(train, means, mode, test)
        entities = pred.entities
        if config.include_baseline:
            results[(mode, BASELINE, 0)] = (pred.score(pred.base, config.rounding), 0.0)
        index_sims = [s for s in config.similarities if s in INDEX_SIMILARITIES]
        brute_sims = [s for s in config.similarities if s in BRUTE_SIMILARITIES]
        if index_sims:
            t0 = time.perf_counter()
            index = build_mode_index(train, means, mode, config.scale_factor)
            log.debug("%s index built in %.2fs", mode, time.perf_counter() - t0)
            for s in index_sims:
                scorer = dataclasses.replace(config.scorer, kind=s)
                sweep = _index_neighbors(
                    index, train, means, mode, entities, config.k_values, config.m, scorer
                )
                for k in config.k_values:
                    value, full = pred.run(sweep[k])
                    results[(mode, s, k)] = (pred.score(value, config.rounding), float(full.mean()))
        if brute_sims:
            kmax = max(config.k_values)
            lists = _brute_neighbors(train, means, mode, entities, brute_sims, kmax)
            for s in brute_sims:
                for k in config.k_values:
                    nbrs = {e: v[:k] for e, v in lists[s].items()}
                    value, full = pred.run(nbrs)
                    results[(mode, s, k)] = (pred.score(value, config.rounding), float(full.mean()))
    return results


def run_experiment(config: ExperimentConfig, dataset: RatingsDataset | None = None) -> EvalReport:
    if dataset is None:
        dataset = load_ratings(config.dataset_path, config.dataset_format, config.scale)
    maes: dict[tuple[str, str, int], list[float]] = defaultdict(list)
    covs: dict[tuple[str, str, int], list[float]] = defaultdict(list)
    for s in range(config.split_count):
        seed = config.base_seed + s
        t0 = time.perf_counter()
        res = evaluate_split(split(dataset, config.train_fraction, seed), config)
        log.info("split %d (seed %d) done in %.1fs", s + 1, seed, time.perf_counter() - t0)
        for key, (err, cov) in res.items():
            maes[key].append(err)
            covs[key].append(cov)
    rows = []
    for key in sorted(maes):
        vals = maes[key]
        std = float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0
        rows.append(EvalRow(*key, float(np.mean(vals)), std, float(np.mean(covs[key])), len(vals)))
    return EvalReport(rows, dict(maes))


def emit_report(report: EvalReport, path, format: str = "csv") -> None:
    if not report.rows:
        raise ValueError("empty report")
    if format not in ("csv", "tsv"):
        raise ValueError(f"unknown report format {format!r}")
    delim = "," if format == "csv" else "\t"
    rows = sorted(report.rows, key=lambda r: (r.mode, r.similarity, r.k))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter=delim, lineterminator="\n")
        w.writerow(REPORT_HEADER)
        for r in rows:
            w.writerow(
                [r.mode, r.similarity, r.k, f"{r.mae_mean:.6f}", f"{r.mae_std:.6f}", f"{r.coverage:.6f}", r.splits]
            )


def read_report(path, format: str = "csv") -> EvalReport:
    delim = "," if format == "csv" else "\t"
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=delim)
        header = next(reader)
        if header != REPORT_HEADER:
            raise ValueError(f"unexpected report header {header}")
        rows = [
            EvalRow(m, s, int(k), float(a), float(b), float(c), int(n))
            for m, s, k, a, b, c, n in reader
        ]
    return EvalReport(rows)

