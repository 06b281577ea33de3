"""Document scoring functions: tf cosine, tf-idf cosine, BM25, Dirichlet and
Jelinek-Mercer query likelihood.

Every scorer exists twice: a scalar ``score_*`` function that scores one
document from its term dictionary (readable, used as the reference in
tests), and the vectorized :func:`score_postings` that ``search`` runs over
postings lists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .encoder import TermId

KINDS = ("tf", "tfidf", "bm25", "dirichlet", "jelinek_mercer")


@dataclass(frozen=True)
class ScorerConfig:
    kind: str = "tf"
    bm25_k1: float = 1.2
    bm25_b: float = 0.75
    dirichlet_mu: float = 2000.0
    jm_lambda: float = 0.1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scorer {self.kind!r}; expected one of {KINDS}")
        if self.bm25_k1 < 0:
            raise ValueError("bm25_k1 must be non-negative")
        if not 0 <= self.bm25_b <= 1:
            raise ValueError("bm25_b must lie in [0, 1]")
        if not self.dirichlet_mu > 0:
            raise ValueError("dirichlet_mu must be positive")
        if not 0 < self.jm_lambda < 1:
            raise ValueError("jm_lambda must lie in (0, 1)")


@dataclass(frozen=True)
class FieldStats:
    """Collection statistics of one field."""

    doc_count: int
    total_terms: int
    df: Mapping[TermId, int]
    cf: Mapping[TermId, int]

    @property
    def avg_doc_length(self) -> float:
        return self.total_terms / self.doc_count if self.doc_count else 0.0

    def p_c(self, term: TermId) -> float:
        return self.cf.get(term, 0) / self.total_terms if self.total_terms else 0.0


def tfidf_idf(doc_count: int, df) -> float | np.ndarray:
    return 1.0 + np.log(doc_count / (np.asarray(df, dtype=float) + 1.0))


def bm25_idf(doc_count: int, df) -> float | np.ndarray:
    df = np.asarray(df, dtype=float)
    return np.log1p((doc_count - df + 0.5) / (df + 0.5))


def _overlap(query: Mapping[TermId, int], doc: Mapping[TermId, int]):
    return sorted(t for t in query if t in doc)


def score_tf(query: Mapping[TermId, int], doc: Mapping[TermId, int], doc_norm: float) -> float:
    """Dot product over shared terms divided by the document norm.

    Dividing the result by the query norm gives the plain cosine.
    """
    if doc_norm <= 0:
        raise ValueError("doc_norm must be positive")
    return math.fsum(query[t] * doc[t] for t in _overlap(query, doc)) / doc_norm


def score_tfidf(query: Mapping[TermId, int], doc: Mapping[TermId, int], stats: FieldStats) -> float:
    idf = {t: float(tfidf_idf(stats.doc_count, stats.df.get(t, 0))) for t in doc}
    doc_norm = math.sqrt(math.fsum((f * idf[t]) ** 2 for t, f in doc.items()))
    if doc_norm == 0:
        return 0.0
    return math.fsum(query[t] * doc[t] * idf[t] ** 2 for t in _overlap(query, doc)) / doc_norm


def score_bm25(
    query: Mapping[TermId, int],
    doc: Mapping[TermId, int],
    stats: FieldStats,
    k1: float = 1.2,
    b: float = 0.75,
) -> float:
    dl = sum(doc.values())
    norm = k1 * (1 - b + b * dl / stats.avg_doc_length)
    total = []
    for t in _overlap(query, doc):
        f = doc[t]
        idf = float(bm25_idf(stats.doc_count, stats.df.get(t, 0)))
        total.append(idf * query[t] * f * (k1 + 1) / (f + norm))
    return math.fsum(total)


def score_dirichlet(
    query: Mapping[TermId, int],
    doc: Mapping[TermId, int],
    stats: FieldStats,
    mu: float = 2000.0,
) -> float:
    """Dirichlet-smoothed query likelihood.

    Each matched term contributes ``q * max(0, ln(1 + f / (mu * p_c)) +
    ln(mu / (mu + doc_length)))``, so the length penalty is charged once per
    matched query token and no term can pull the score below zero. Terms
    unseen in the collection are skipped.
    """
    dl = sum(doc.values())
    penalty = math.log(mu / (mu + dl))
    parts = [
        query[t] * max(0.0, math.log1p(doc[t] / (mu * stats.p_c(t))) + penalty)
        for t in _overlap(query, doc)
        if stats.p_c(t) > 0
    ]
    return math.fsum(parts)


def score_jelinek_mercer(
    query: Mapping[TermId, int],
    doc: Mapping[TermId, int],
    stats: FieldStats,
    lam: float = 0.1,
) -> float:
    dl = sum(doc.values())
    if dl == 0:
        return 0.0
    ratio = (1 - lam) / lam
    parts = [
        query[t] * math.log1p(ratio * (doc[t] / dl) / stats.p_c(t))
        for t in _overlap(query, doc)
        if stats.p_c(t) > 0
    ]
    return math.fsum(parts)


def score_document(
    config: ScorerConfig,
    query: Mapping[TermId, int],
    doc: Mapping[TermId, int],
    stats: FieldStats,
) -> float:
    """Dispatch to the scalar scorer named by ``config.kind``."""
    if config.kind == "tf":
        n = math.sqrt(sum(f * f for f in doc.values()))
        return score_tf(query, doc, n) if n > 0 else 0.0
    if config.kind == "tfidf":
        return score_tfidf(query, doc, stats)
    if config.kind == "bm25":
        return score_bm25(query, doc, stats, config.bm25_k1, config.bm25_b)
    if config.kind == "dirichlet":
        return score_dirichlet(query, doc, stats, config.dirichlet_mu)
    return score_jelinek_mercer(query, doc, stats, config.jm_lambda)


@dataclass
class TermPostings:
    """One matched query term: its query frequency and postings arrays."""

    qf: int
    ords: np.ndarray
    freqs: np.ndarray
    df: int
    cf: int


def score_postings(
    config: ScorerConfig,
    matched: Sequence[TermPostings],
    doc_lengths: np.ndarray,
    doc_norms: np.ndarray,
    tfidf_norms: np.ndarray | None,
    doc_count: int,
    total_terms: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Score every document that shares a term with the query.

    Returns ``(ordinals, scores)`` for the touched documents, ordinals
    ascending.
    """
    if not matched:
        return np.empty(0, dtype=np.int64), np.empty(0)
    ords = np.concatenate([m.ords for m in matched])
    f = np.concatenate([m.freqs for m in matched]).astype(float)
    sizes = [len(m.ords) for m in matched]
    qf = np.repeat([float(m.qf) for m in matched], sizes)
    kind = config.kind
    if kind == "tf":
        contrib = qf * f
    elif kind == "tfidf":
        idf = np.repeat(tfidf_idf(doc_count, [m.df for m in matched]), sizes)
        contrib = qf * f * idf * idf
    elif kind == "bm25":
        k1, b = config.bm25_k1, config.bm25_b
        avgdl = total_terms / doc_count
        idf = np.repeat(bm25_idf(doc_count, [m.df for m in matched]), sizes)
        norm = k1 * (1 - b + b * doc_lengths[ords] / avgdl)
        contrib = idf * qf * f * (k1 + 1) / (f + norm)
    elif kind == "dirichlet":
        mu = config.dirichlet_mu
        pc = np.repeat([m.cf / total_terms for m in matched], sizes)
        penalty = np.log(mu / (mu + doc_lengths[ords]))
        contrib = qf * np.maximum(0.0, np.log1p(f / (mu * pc)) + penalty)
    else:
        lam = config.jm_lambda
        pc = np.repeat([m.cf / total_terms for m in matched], sizes)
        contrib = qf * np.log1p((1 - lam) / lam * (f / doc_lengths[ords]) / pc)

    cand, inv = np.unique(ords, return_inverse=True)
    scores = np.bincount(inv, weights=contrib, minlength=len(cand))
    if kind == "tf":
        scores = scores / doc_norms[cand]
    elif kind == "tfidf":
        scores = scores / tfidf_norms[cand]
    return cand, scores
