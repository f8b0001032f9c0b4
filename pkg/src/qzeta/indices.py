"""Multi-index algebra: parsing, admissibility, duality and sequence statistics.

Indices are stored outermost-first, so ``(k1, ..., kd)`` pairs with the
summation range ``m1 > ... > md > 0``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .errors import DomainError, IndexParseError

__all__ = [
    "MultiIndex",
    "RunDecomposition",
    "SequenceRecord",
    "SequenceStats",
    "parse_index",
    "index_stats",
    "run_decomposition",
    "dual",
    "height_one",
    "admissible_indices",
    "sequence_stats",
]

_PART = re.compile(r"^\s*(\d+)\s*(?:\^\s*(\d+)\s*)?$")


@dataclass(frozen=True)
class MultiIndex:
    """An ordered tuple of positive integers ``(k1, ..., kd)``."""

    parts: tuple[int, ...]

    def __post_init__(self) -> None:
        parts = tuple(int(p) for p in self.parts)
        if not parts:
            raise DomainError("a multi-index needs at least one part")
        if any(p < 1 for p in parts):
            raise DomainError(f"multi-index parts must be positive: {parts}")
        object.__setattr__(self, "parts", parts)

    @classmethod
    def of(cls, *parts: int) -> MultiIndex:
        return cls(tuple(parts))

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self) -> Iterator[int]:
        return iter(self.parts)

    def __getitem__(self, i: int) -> int:
        return self.parts[i]

    def __str__(self) -> str:
        return format_index(self.parts)

    @property
    def weight(self) -> int:
        return sum(self.parts)

    @property
    def depth(self) -> int:
        return len(self.parts)

    @property
    def height(self) -> int:
        return sum(1 for p in self.parts if p >= 2)

    @property
    def admissible(self) -> bool:
        return self.parts[0] >= 2

    def require_admissible(self) -> MultiIndex:
        if not self.admissible:
            raise DomainError(f"index {self} is not admissible (first part must be >= 2)")
        return self

    def concat(self, other: Iterable[int]) -> MultiIndex:
        return MultiIndex(self.parts + tuple(other))


def format_index(parts: Sequence[int]) -> str:
    """Render parts with ``a^b`` shorthand for runs of length >= 3."""
    out: list[str] = []
    i = 0
    while i < len(parts):
        j = i
        while j < len(parts) and parts[j] == parts[i]:
            j += 1
        run = j - i
        if run >= 3:
            out.append(f"{parts[i]}^{run}")
        else:
            out.extend(str(parts[i]) for _ in range(run))
        i = j
    return ",".join(out)


def parse_index(text: str) -> MultiIndex:
    """Parse ``"2,1^3"`` style text into a :class:`MultiIndex`.

    Grammar: ``index := part ("," part)*``, ``part := INT | INT "^" INT``
    with every INT >= 1.
    """
    if text is None or not text.strip():
        raise IndexParseError("empty index")
    parts: list[int] = []
    for token in text.split(","):
        match = _PART.match(token)
        if match is None:
            raise IndexParseError(f"invalid index token {token.strip()!r}")
        value = int(match.group(1))
        count = int(match.group(2)) if match.group(2) is not None else 1
        if value < 1:
            raise IndexParseError(f"index part must be >= 1, got {token.strip()!r}")
        if count < 1:
            raise IndexParseError(f"repetition count must be >= 1 in {token.strip()!r}")
        parts.extend([value] * count)
    return MultiIndex(tuple(parts))


def index_stats(k: MultiIndex) -> tuple[int, int, int, bool]:
    """Return ``(weight, depth, height, admissible)``."""
    return k.weight, k.depth, k.height, k.admissible


@dataclass(frozen=True)
class RunDecomposition:
    """Pairs ``(a_i, b_i)`` with ``k = (a1+1, {1}^(b1-1), ..., as+1, {1}^(bs-1))``."""

    pairs: tuple[tuple[int, int], ...]

    def assemble(self) -> MultiIndex:
        parts: list[int] = []
        for a, b in self.pairs:
            parts.append(a + 1)
            parts.extend([1] * (b - 1))
        return MultiIndex(tuple(parts))


def run_decomposition(k: MultiIndex) -> RunDecomposition:
    k.require_admissible()
    pairs: list[tuple[int, int]] = []
    parts = k.parts
    i = 0
    while i < len(parts):
        # every block starts at a part >= 2 and absorbs the following ones
        a = parts[i] - 1
        j = i + 1
        while j < len(parts) and parts[j] == 1:
            j += 1
        pairs.append((a, j - i))
        i = j
    return RunDecomposition(tuple(pairs))


def dual(k: MultiIndex) -> MultiIndex:
    """Dual index: swap and reverse the run lengths of ``k``."""
    runs = run_decomposition(k)
    parts: list[int] = []
    for a, b in reversed(runs.pairs):
        parts.append(b + 1)
        parts.extend([1] * (a - 1))
    return MultiIndex(tuple(parts))


def height_one(n: int, m: int) -> MultiIndex:
    """The index ``(2 + n, {1}^m)``."""
    if n < 0 or m < 0:
        raise DomainError("height-one parameters must be nonnegative")
    return MultiIndex((2 + n,) + (1,) * m)


def _compositions(total: int, first_min: int) -> Iterator[tuple[int, ...]]:
    if total == 0:
        yield ()
        return
    for first in range(first_min, total + 1):
        for rest in _compositions(total - first, 1):
            yield (first,) + rest


def admissible_indices(max_weight: int, min_weight: int = 2) -> list[MultiIndex]:
    """All admissible indices with ``min_weight <= weight <= max_weight``.

    Ordered by weight, then lexicographically within a weight.
    """
    out: list[MultiIndex] = []
    for w in range(max(min_weight, 2), max_weight + 1):
        out.extend(MultiIndex(c) for c in sorted(_compositions(w, 2)))
    return out


@dataclass(frozen=True)
class SequenceRecord:
    n: int
    depth: int
    weight: int
    in_n2: bool
    l: int | None = None
    v: int | None = None
    s_parts: tuple[int, ...] | None = None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "depth": self.depth,
            "weight": self.weight,
            "in_N2": self.in_n2,
            "l": self.l,
            "v": self.v,
            "s_parts": list(self.s_parts) if self.s_parts is not None else None,
        }


@dataclass
class SequenceStats:
    """Per-element classification data plus the observed sets D, V, W, W'.

    ``bounded`` maps each set name to whether its running maximum stopped
    growing over the second half of the prefix. It describes the observed
    prefix only.
    """

    records: list[SequenceRecord]
    D: set[int] = field(default_factory=set)
    V: set[int] = field(default_factory=set)
    W: set[int] = field(default_factory=set)
    W_prime: set[int] = field(default_factory=set)
    bounded: dict[str, bool] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "records": [r.to_dict() for r in self.records],
            "D": sorted(self.D),
            "V": sorted(self.V),
            "W": sorted(self.W),
            "W_prime": sorted(self.W_prime),
            "bounded": dict(sorted(self.bounded.items())),
        }


def _classify(n: int, k: MultiIndex) -> SequenceRecord:
    parts = k.parts
    if parts[0] != 2:
        return SequenceRecord(n, k.depth, k.weight, False)
    l = 1
    if k.depth >= 2:
        for i in range(1, k.depth):
            if parts[i] >= 2:
                l = i + 1  # 1-based position of the first part >= 2 after k1
                break
    v = k.depth - l + 1
    s_parts = parts[l - 1:] if l >= 2 else None
    return SequenceRecord(n, k.depth, k.weight, True, l, v, s_parts)


def _stabilized(values: list[tuple[int, int]]) -> bool:
    # values: (position, value) pairs in sequence order
    if not values:
        return True
    half = len(values) // 2
    first = max((v for _, v in values[: max(half, 1)]), default=0)
    second = max((v for _, v in values[half:]), default=0)
    return second <= first


def sequence_stats(ks: Sequence[MultiIndex]) -> SequenceStats:
    """Classify a finite prefix ``k(1), k(2), ...`` of admissible indices.

    Elements are numbered from 1. For ``k(n)`` with ``k1(n) = 2``, ``l(n)``
    is the position of the first part >= 2 after the leading 2 (or 1 when
    there is none), and ``v(n) = d(n) - l(n) + 1``. When ``l(n) = 1`` and
    ``d(n) >= 2`` every later part is 1, so ``v(n)`` counts those ones plus
    the leading 2.
    """
    records: list[SequenceRecord] = []
    for pos, k in enumerate(ks, start=1):
        if not k.admissible:
            raise DomainError(f"element {pos} ({k}) is not admissible")
        records.append(_classify(pos, k))
    stats = SequenceStats(records)
    series: dict[str, list[tuple[int, int]]] = {"D": [], "V": [], "W": [], "W_prime": []}
    for r in records:
        if not r.in_n2:
            continue
        stats.D.add(r.depth)
        stats.V.add(r.v)
        stats.W.add(r.weight)
        series["D"].append((r.n, r.depth))
        series["V"].append((r.n, r.v))
        series["W"].append((r.n, r.weight))
        if r.l is not None and r.l >= 2:
            w = sum(r.s_parts)
            stats.W_prime.add(w)
            series["W_prime"].append((r.n, w))
    everything = [(r.n, r.depth) for r in records]
    weights = [(r.n, r.weight) for r in records]
    stats.bounded = {name: _stabilized(vals) for name, vals in series.items()}
    stats.bounded["depth_all"] = _stabilized(everything)
    stats.bounded["weight_all"] = _stabilized(weights)
    return stats
