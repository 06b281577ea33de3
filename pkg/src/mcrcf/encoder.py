"""Turn a rating profile into a two-field term-frequency document.

Each rating becomes a term whose frequency is its scaled |mean-centered
rate|. Above-mean ratings get the ``p`` prefix, below-mean ratings ``n``.
The PRATE field holds these terms as-is; NRATE holds the same terms with
every prefix flipped, so a query scored against NRATE picks up exactly the
opposite-sign cross products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple

# Absorbs float error in |mcr| * scale so exact multiples of 1/scale are not
# truncated one unit low (e.g. (4 - 3.07) * 100 == 92.99999999999997).
_TRUNC_EPS = 1e-7

DEFAULT_SCALE_FACTOR = 100
MAX_SCALE_FACTOR = 10**6


class TermId(NamedTuple):
    prefix: str
    raw_id: int

    def __str__(self) -> str:
        return f"{self.prefix}{self.raw_id}"

    def flipped(self) -> "TermId":
        return TermId("n" if self.prefix == "p" else "p", self.raw_id)

    @classmethod
    def parse(cls, text: str) -> "TermId":
        if len(text) < 2 or text[0] not in "pn" or not text[1:].isdigit():
            raise ValueError(f"bad term id {text!r}")
        return cls(text[0], int(text[1:]))


Query = Mapping[TermId, int]


def flip(terms: Mapping[TermId, int]) -> dict[TermId, int]:
    """Swap the p/n prefix of every term."""
    return {t.flipped(): f for t, f in terms.items()}


def norm(terms: Mapping[TermId, int]) -> float:
    return math.sqrt(sum(f * f for f in terms.values()))


@dataclass(frozen=True)
class EncodedDocument:
    doc_id: int
    prate: dict[TermId, int]
    nrate: dict[TermId, int]
    stored_mean: float
    norm: float = field(default=0.0)

    @property
    def length(self) -> int:
        return sum(self.prate.values())

    def text(self, field: str = "PRATE") -> str:
        """Space-separated token stream, e.g. ``"p37 p37 n24"``."""
        terms = self.prate if field == "PRATE" else self.nrate
        return " ".join(" ".join([str(t)] * f) for t, f in terms.items())


def _check_scale(scale_factor: int) -> None:
    if not isinstance(scale_factor, int) or not 1 <= scale_factor <= MAX_SCALE_FACTOR:
        raise ValueError(f"scale_factor must be an integer in [1, {MAX_SCALE_FACTOR}]")


def quantize(deviation: float, scale_factor: int) -> int:
    """Truncate ``|deviation| * scale_factor`` toward zero."""
    return int(math.floor(abs(deviation) * scale_factor + _TRUNC_EPS))


def encode_query(
    profile: Iterable[tuple[int, float]] | Mapping[int, float],
    mean: float,
    scale_factor: int = DEFAULT_SCALE_FACTOR,
) -> dict[TermId, int]:
    _check_scale(scale_factor)
    if isinstance(profile, Mapping):
        profile = profile.items()
    terms: dict[TermId, int] = {}
    for raw_id, rating in profile:
        dev = rating - mean
        q = quantize(dev, scale_factor)
        if q == 0:
            continue
        terms[TermId("p" if dev > 0 else "n", int(raw_id))] = q
    return terms


def encode_profile(
    doc_id: int,
    profile: Iterable[tuple[int, float]] | Mapping[int, float],
    mean: float,
    scale_factor: int = DEFAULT_SCALE_FACTOR,
) -> EncodedDocument:
    prate = encode_query(profile, mean, scale_factor)
    return EncodedDocument(int(doc_id), prate, flip(prate), float(mean), norm(prate))
