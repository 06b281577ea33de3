"""In-memory inverted index over encoded rating documents.

File layout (little-endian)::

    b"MCRX" | version u32 | mode u8 | scale_factor u32
    doc count u64, then per doc: doc_id u64, stored_mean f64, norm f64, doc_length u64
    term count u64, then per term: field u8, prefix u8, raw_id u64,
        postings count u64, ordinal deltas u32[count], frequencies u32[count]

Terms are written sorted by (field, prefix, raw_id).
"""

from __future__ import annotations

import math
import struct
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .encoder import EncodedDocument, TermId
from .scorers import FieldStats, ScorerConfig, TermPostings, score_postings, tfidf_idf

FIELDS = ("PRATE", "NRATE")
MODES = ("user_based", "item_based")
MAGIC = b"MCRX"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sIBI")
_DOC = np.dtype([("doc_id", "<u8"), ("mean", "<f8"), ("norm", "<f8"), ("length", "<u8")])
_TERM = struct.Struct("<BBQQ")
_U64 = struct.Struct("<Q")


class IndexFormatError(ValueError):
    """Raised when an index file is corrupt, truncated or of another version."""


class SearchHit(NamedTuple):
    doc_id: int
    score: float


class InvertedIndex:
    """Two-field (PRATE/NRATE) postings with per-document statistics.

    Documents are addressed internally by ordinal (position in ascending
    doc_id order). Instances are immutable once built.
    """

    def __init__(
        self,
        mode: str,
        scale_factor: int,
        doc_ids: np.ndarray,
        means: np.ndarray,
        norms: np.ndarray,
        lengths: np.ndarray,
        postings: Mapping[str, Mapping[TermId, tuple[np.ndarray, np.ndarray]]],
    ):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        self.mode = mode
        self.scale_factor = int(scale_factor)
        self.doc_ids = np.asarray(doc_ids, dtype=np.int64)
        self.means = np.asarray(means, dtype=float)
        self.norms = np.asarray(norms, dtype=float)
        self.lengths = np.asarray(lengths, dtype=np.int64)
        self.postings = {f: dict(postings.get(f, {})) for f in FIELDS}
        self.ordinal = {int(d): o for o, d in enumerate(self.doc_ids)}

    def __len__(self) -> int:
        return len(self.doc_ids)

    def __repr__(self) -> str:
        return (
            f"InvertedIndex(mode={self.mode!r}, docs={len(self)}, "
            f"terms={len(self.postings['PRATE'])}, scale_factor={self.scale_factor})"
        )

    def __contains__(self, doc_id: int) -> bool:
        return int(doc_id) in self.ordinal

    def stored_mean(self, doc_id: int) -> float:
        return float(self.means[self.ordinal[int(doc_id)]])

    @cached_property
    def total_terms(self) -> int:
        return int(self.lengths.sum())

    def stats(self, field: str) -> FieldStats:
        return self._stats[_check_field(field)]

    @cached_property
    def _stats(self) -> dict[str, FieldStats]:
        out = {}
        for f in FIELDS:
            plist = self.postings[f]
            out[f] = FieldStats(
                doc_count=len(self),
                total_terms=self.total_terms,
                df={t: len(o) for t, (o, _) in plist.items()},
                cf={t: int(fr.sum()) for t, (_, fr) in plist.items()},
            )
        return out

    @cached_property
    def _tfidf_norms(self) -> dict[str, np.ndarray]:
        out = {}
        for f in FIELDS:
            sq = np.zeros(len(self))
            # fixed accumulation order: identical after reload and across mirrored fields
            flip = f == "NRATE"
            plist = self.postings[f]
            for t in sorted(plist, key=lambda t: (t.raw_id, t.flipped().prefix if flip else t.prefix)):
                ords, freqs = plist[t]
                idf = tfidf_idf(len(self), len(ords))
                np.add.at(sq, ords, (freqs * idf) ** 2)
            out[f] = np.sqrt(sq)
        return out

    @cached_property
    def _forward(self) -> list[dict[TermId, int]]:
        docs: list[dict[TermId, int]] = [{} for _ in range(len(self))]
        for t, (ords, freqs) in self.postings["PRATE"].items():
            for o, fr in zip(ords.tolist(), freqs.tolist()):
                docs[o][t] = fr
        return docs

    def document_terms(self, doc_id: int, field: str = "PRATE") -> dict[TermId, int]:
        """Reconstruct one document's field from the postings."""
        terms = self._forward[self.ordinal[int(doc_id)]]
        if _check_field(field) == "NRATE":
            return {t.flipped(): f for t, f in terms.items()}
        return dict(sorted(terms.items()))


def rank_order(ids: np.ndarray, scores: np.ndarray) -> np.ndarray:
    """Indices sorting by score descending, then id ascending.

    Scores equal to 12 significant digits count as tied, so that values
    which agree mathematically but differ in the last bits (different
    summation order) still fall back to the id rule.
    """
    s = np.asarray(scores, dtype=float)
    with np.errstate(divide="ignore"):
        mag = np.where(s == 0, 1.0, 10.0 ** np.floor(np.log10(np.abs(s))))
    key = np.round(s / mag, 11) * mag
    return np.lexsort((ids, -key))


def _check_field(field: str) -> str:
    if field not in FIELDS:
        raise ValueError(f"unknown field {field!r}; expected one of {FIELDS}")
    return field


def build_index(
    docs: Iterable[EncodedDocument], mode: str, scale_factor: int
) -> InvertedIndex:
    docs = sorted(docs, key=lambda d: d.doc_id)
    ids = [d.doc_id for d in docs]
    if len(set(ids)) != len(ids):
        dup = next(i for i, j in zip(ids, ids[1:]) if i == j)
        raise ValueError(f"duplicate doc_id {dup}")
    raw: dict[str, dict[TermId, tuple[list[int], list[int]]]] = {f: {} for f in FIELDS}
    for o, d in enumerate(docs):
        for f, terms in (("PRATE", d.prate), ("NRATE", d.nrate)):
            plist = raw[f]
            for t, fr in terms.items():
                entry = plist.get(t)
                if entry is None:
                    entry = plist[t] = ([], [])
                entry[0].append(o)
                entry[1].append(fr)
    postings = {
        f: {
            t: (np.array(o, dtype=np.int64), np.array(fr, dtype=np.int64))
            for t, (o, fr) in plist.items()
        }
        for f, plist in raw.items()
    }
    return InvertedIndex(
        mode,
        scale_factor,
        np.array(ids, dtype=np.int64),
        np.array([d.stored_mean for d in docs]),
        np.array([d.norm for d in docs]),
        np.array([d.length for d in docs], dtype=np.int64),
        postings,
    )


def search(
    index: InvertedIndex,
    field: str,
    query: Mapping[TermId, int],
    top_n: int,
    scorer: ScorerConfig | None = None,
    exclude_doc_id: int | None = None,
) -> list[SearchHit]:
    """Top ``top_n`` documents of ``field`` by score, ties by ascending doc_id."""
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    ids, scores = rank_all(index, field, query, scorer, exclude_doc_id)
    return [SearchHit(int(d), float(x)) for d, x in zip(ids[:top_n], scores[:top_n])]


def rank_all(
    index: InvertedIndex,
    field: str,
    query: Mapping[TermId, int],
    scorer: ScorerConfig | None = None,
    exclude_doc_id: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Every document sharing a term with ``query``, in search order.

    ``search`` returns a prefix of this ranking.
    """
    plist = index.postings[_check_field(field)]
    cand, scores = _score(index, field, plist, query, scorer or ScorerConfig())
    if exclude_doc_id is not None and int(exclude_doc_id) in index.ordinal:
        keep = cand != index.ordinal[int(exclude_doc_id)]
        cand, scores = cand[keep], scores[keep]
    ids = index.doc_ids[cand]
    order = rank_order(ids, scores)
    return ids[order], scores[order]


def _score(index, field, plist, query, scorer):
    cf = index.stats(field).cf if scorer.kind in ("dirichlet", "jelinek_mercer") else None
    matched = []
    for t, qf in query.items():
        entry = plist.get(t)
        if entry is None:
            continue
        ords, freqs = entry
        matched.append(TermPostings(qf, ords, freqs, len(ords), cf[t] if cf is not None else 0))
    tfidf_norms = index._tfidf_norms[field] if scorer.kind == "tfidf" else None
    return score_postings(
        scorer,
        matched,
        index.lengths,
        index.norms,
        tfidf_norms,
        len(index),
        index.total_terms,
    )


def save_index(index: InvertedIndex, path) -> None:
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, MODES.index(index.mode), index.scale_factor))
        table = np.empty(len(index), dtype=_DOC)
        table["doc_id"] = index.doc_ids
        table["mean"] = index.means
        table["norm"] = index.norms
        table["length"] = index.lengths
        fh.write(_U64.pack(len(index)))
        fh.write(table.tobytes())
        terms = sorted(
            (FIELDS.index(f), t.prefix, t.raw_id, t)
            for f in FIELDS
            for t in index.postings[f]
        )
        fh.write(_U64.pack(len(terms)))
        for fcode, prefix, raw_id, t in terms:
            ords, freqs = index.postings[FIELDS[fcode]][t]
            fh.write(_TERM.pack(fcode, ord(prefix), raw_id, len(ords)))
            fh.write(np.diff(ords, prepend=0).astype("<u4").tobytes())
            fh.write(freqs.astype("<u4").tobytes())


class _Reader:
    def __init__(self, data: bytes, path):
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise IndexFormatError(f"{self.path}: truncated at byte {self.pos}")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, st: struct.Struct):
        return st.unpack(self.take(st.size))


def load_index(path) -> InvertedIndex:
    path = Path(path)
    r = _Reader(path.read_bytes(), path)
    if len(r.data) < _HEADER.size or r.data[:4] != MAGIC:
        raise IndexFormatError(f"{path}: not an index file (bad magic)")
    _, version, mode_code, scale = r.unpack(_HEADER)
    if version != FORMAT_VERSION:
        raise IndexFormatError(f"{path}: unsupported format version {version}")
    if mode_code >= len(MODES):
        raise IndexFormatError(f"{path}: bad mode byte {mode_code}")
    (n_docs,) = r.unpack(_U64)
    table = np.frombuffer(r.take(n_docs * _DOC.itemsize), dtype=_DOC)
    (n_terms,) = r.unpack(_U64)
    postings: dict[str, dict[TermId, tuple[np.ndarray, np.ndarray]]] = {f: {} for f in FIELDS}
    for _ in range(n_terms):
        fcode, prefix, raw_id, count = r.unpack(_TERM)
        if fcode >= len(FIELDS) or chr(prefix) not in "pn":
            raise IndexFormatError(f"{path}: bad term record at byte {r.pos - _TERM.size}")
        deltas = np.frombuffer(r.take(4 * count), dtype="<u4").astype(np.int64)
        freqs = np.frombuffer(r.take(4 * count), dtype="<u4").astype(np.int64)
        ords = np.cumsum(deltas)
        if count and ords[-1] >= n_docs:
            raise IndexFormatError(f"{path}: posting references missing document")
        postings[FIELDS[fcode]][TermId(chr(prefix), int(raw_id))] = (ords, freqs)
    if r.pos != len(r.data):
        raise IndexFormatError(f"{path}: {len(r.data) - r.pos} trailing bytes")
    return InvertedIndex(
        MODES[mode_code],
        scale,
        table["doc_id"].astype(np.int64),
        table["mean"].copy(),
        table["norm"].copy(),
        table["length"].astype(np.int64),
        postings,
    )


def query_norm(query: Mapping[TermId, int]) -> float:
    return math.sqrt(sum(f * f for f in query.values()))
