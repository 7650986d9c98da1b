"""Heaps of signed pieces on Z_m x Z+.

A heap is stored as one stack per column, each stack a list of
``(height, sign)`` pairs with strictly increasing heights.  Signs are the
integers ``+1`` and ``-1``.  Heights are the longest-chain heights of the
piece order, so removing a roof piece never moves anything else.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

MIN_COLUMNS = 4

SIGN_CHARS = {1: "+", -1: "-"}
CHAR_SIGNS = {"+": 1, "-": -1}


@dataclass(frozen=True, order=True)
class Piece:
    height: int
    column: int
    sign: int

    def __str__(self) -> str:
        return f"({self.height},{self.column},{SIGN_CHARS[self.sign]})"


@dataclass(frozen=True)
class Added:
    piece: Piece

    @property
    def height(self) -> int:
        return self.piece.height


@dataclass(frozen=True)
class Annihilated:
    victim: Piece


DropEvent = Union[Added, Annihilated]

# level 1 first; each level is a set of (column, sign)
RoofLevels = list[frozenset[tuple[int, int]]]


def _check_sign(sign: int) -> int:
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    return sign


class Heap:
    """Finite signed heap with ``m`` periodic columns."""

    def __init__(self, m: int):
        if m < MIN_COLUMNS:
            raise ValueError(f"need m >= {MIN_COLUMNS} columns, got {m}")
        self.m = m
        self.columns: list[list[tuple[int, int]]] = [[] for _ in range(m)]
        self.step_count = 0
        self.annihilation_count = 0

    # construction ---------------------------------------------------------

    @classmethod
    def from_pieces(cls, m: int, pieces: Iterable[Piece | tuple[int, int, int]]) -> "Heap":
        """Hand-built heap; no validity is enforced (use :func:`validate`)."""
        heap = cls(m)
        for p in pieces:
            h, c, s = (p.height, p.column, p.sign) if isinstance(p, Piece) else p
            if not 0 <= c < m:
                raise ValueError(f"column {c} out of range for m={m}")
            heap.columns[c].append((h, _check_sign(s)))
        for col in heap.columns:
            col.sort()
        heap.step_count = len(heap)
        return heap

    def copy(self) -> "Heap":
        other = Heap(self.m)
        other.columns = [list(col) for col in self.columns]
        other.step_count = self.step_count
        other.annihilation_count = self.annihilation_count
        return other

    # queries ----------------------------------------------------------------

    def __len__(self) -> int:
        return sum(len(col) for col in self.columns)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Heap):
            return NotImplemented
        return self.m == other.m and self.columns == other.columns

    def __repr__(self) -> str:
        return f"Heap(m={self.m}, size={len(self)})"

    def pieces(self) -> Iterator[Piece]:
        for c, col in enumerate(self.columns):
            for h, s in col:
                yield Piece(h, c, s)

    def top_height(self, column: int) -> int:
        col = self.columns[column % self.m]
        return col[-1][0] if col else 0

    def top(self, column: int) -> Piece | None:
        column %= self.m
        col = self.columns[column]
        return Piece(col[-1][0], column, col[-1][1]) if col else None

    def column_in_roof(self, column: int) -> bool:
        """True when the top of ``column`` is a removable piece."""
        h = self.top_height(column)
        return h > 0 and h > self.top_height(column - 1) and h > self.top_height(column + 1)

    def roof(self) -> set[Piece]:
        return {self.top(c) for c in range(self.m) if self.column_in_roof(c)}

    def roof_size(self) -> int:
        return sum(self.column_in_roof(c) for c in range(self.m))

    def landing_height(self, column: int) -> int:
        return max(self.top_height(column - 1), self.top_height(column), self.top_height(column + 1)) + 1

    # dynamics ---------------------------------------------------------------

    def _check_column(self, column: int) -> None:
        if not 0 <= column < self.m:
            raise ValueError(f"column {column} out of range for m={self.m}")

    def drop(self, column: int, sign: int) -> DropEvent:
        """Drop a signed piece: annihilate against an opposite roof top, else stack."""
        self._check_column(column)
        _check_sign(sign)
        top = self.top(column)
        annihilate = top is not None and top.sign != sign and self.column_in_roof(column)
        return self.apply(column, sign, annihilate)

    def apply(self, column: int, sign: int, annihilate: bool) -> DropEvent:
        """Apply a step whose outcome is already decided (replay, p-process)."""
        self._check_column(column)
        self.step_count += 1
        if annihilate:
            if not self.column_in_roof(column):
                raise ValueError(f"column {column} has no roof piece to annihilate")
            h, s = self.columns[column].pop()
            self.annihilation_count += 1
            return Annihilated(Piece(h, column, s))
        h = self.landing_height(column)
        self.columns[column].append((h, _check_sign(sign)))
        return Added(Piece(h, column, sign))

    # serialization ----------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "columns": [[[h, SIGN_CHARS[s]] for h, s in col] for col in self.columns],
            "step_count": self.step_count,
            "annihilation_count": self.annihilation_count,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Heap":
        heap = cls(int(data["m"]))
        if len(data["columns"]) != heap.m:
            raise ValueError("column count does not match m")
        heap.columns = [[(int(h), CHAR_SIGNS[s]) for h, s in col] for col in data["columns"]]
        heap.step_count = int(data.get("step_count", len(heap)))
        heap.annihilation_count = int(data.get("annihilation_count", 0))
        return heap

    def dumps(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def loads(cls, text: str) -> "Heap":
        return cls.from_dict(json.loads(text))


def new_heap(m: int) -> Heap:
    return Heap(m)


def validate(heap: Heap) -> list[str]:
    """Return every violated heap condition; an empty list means valid."""
    m = heap.m
    problems = []
    occupied = [set() for _ in range(m)]
    for c, col in enumerate(heap.columns):
        heights = [h for h, _ in col]
        if heights != sorted(set(heights)):
            problems.append(f"column {c}: heights not strictly increasing")
        if heights and heights[0] < 1:
            problems.append(f"column {c}: height below 1")
        occupied[c] = set(heights)
    for c, col in enumerate(heap.columns):
        left, right = occupied[(c - 1) % m], occupied[(c + 1) % m]
        for i, (h, s) in enumerate(col):
            if h > 1 and not ({h - 1} & (occupied[c] | left | right)):
                problems.append(f"support: piece ({h},{c}) has nothing at height {h - 1} below it")
            if i + 1 < len(col) and col[i + 1][0] == h + 1 and col[i + 1][1] != s:
                problems.append(f"sign: pieces at heights {h},{h + 1} in column {c} differ in sign")
            if h in right:
                problems.append(f"adjacency: columns {c},{(c + 1) % m} share height {h}")
    if len(heap) != heap.step_count - 2 * heap.annihilation_count:
        problems.append(
            f"size: {len(heap)} pieces but {heap.step_count} steps and "
            f"{heap.annihilation_count} annihilations"
        )
    return problems


def _roof_columns(tops: list[int]) -> list[int]:
    m = len(tops)
    return [c for c in range(m) if tops[c] > 0 and tops[c] > tops[c - 1] and tops[c] > tops[(c + 1) % m]]


def level_decomposition(heap: Heap) -> RoofLevels:
    """Strip roofs repeatedly; level 1 is the roof of ``heap``."""
    depth = [len(col) for col in heap.columns]
    cols = heap.columns
    levels: RoofLevels = []
    while any(depth):
        tops = [cols[c][d - 1][0] if d else 0 for c, d in enumerate(depth)]
        level = _roof_columns(tops)
        levels.append(frozenset((c, cols[c][depth[c] - 1][1]) for c in level))
        for c in level:
            depth[c] -= 1
    return levels


def heap_from_levels(levels: RoofLevels, m: int) -> Heap:
    """Rebuild a heap by dropping its roof levels deepest first."""
    heap = Heap(m)
    for level in reversed(levels):
        for c, s in sorted(level):
            heap.apply(c, s, annihilate=False)
    return heap


def _height(entry):
    return entry[0]


def upset(heap: Heap, column: int, index: int | None = None) -> dict[int, int]:
    """Pieces above the piece at ``columns[column][index]`` (default: the top).

    Returns, per column, the lowest stack index belonging to the up-set; the
    piece itself is included.  Up-sets are upward closed in every column,
    so a threshold index per column describes them completely.
    """
    col = heap.columns[column]
    if index is None:
        index = len(col) - 1
    if not 0 <= index < len(col):
        raise IndexError("no such piece")
    m = heap.m
    first = {column: index}
    work = [column]
    while work:
        c = work.pop()
        base = heap.columns[c][first[c]][0]
        for d in ((c - 1) % m, (c + 1) % m):
            stack = heap.columns[d]
            j = bisect_right(stack, base, key=_height)
            if j < len(stack) and j < first.get(d, len(stack)):
                first[d] = j
                work.append(d)
    return first


def blockers(heap: Heap, column: int = 0) -> list[Piece]:
    """Pieces that must be annihilated before the top of ``column`` is in the roof."""
    col = heap.columns[column]
    if not col:
        return []
    first = upset(heap, column)
    out = []
    for c, j in first.items():
        for h, s in heap.columns[c][j:]:
            if not (c == column and h == col[-1][0]):
                out.append(Piece(h, c, s))
    return sorted(out)


@dataclass(frozen=True)
class ConfigChain:
    """Shape of the pieces blocking the highest piece of a column.

    ``offsets`` lists the blocking pieces' column offsets from the blocked
    piece, ordered by depth above it (longest chain) and then by offset.
    Offsets are unwrapped along the blocking order, so the 4-chain on four
    columns reads ``(1, 2, 3)`` rather than ``(1, 2, -1)``.  The last entry
    is the distinguished (topmost) piece.  Branched shapes such as
    ``(-1, 1)`` are allowed: the order, not a path, is what is recorded.
    """

    offsets: tuple[int, ...]
    name: str = field(default="", compare=False)

    def __len__(self) -> int:
        return len(self.offsets)

    def __str__(self) -> str:
        return self.name or "[" + ",".join(f"{o:+d}" for o in self.offsets) + "]"


CHAINS = {
    "empty": ConfigChain((), "empty"),
    "2-chain": ConfigChain((1,), "2-chain"),
    "3-chain": ConfigChain((1, 2), "3-chain"),
    "4-chain": ConfigChain((1, 2, 3), "4-chain"),
    "fork": ConfigChain((-1, 1), "fork"),
    "stack": ConfigChain((1, 1), "stack"),
}


def parse_chain(text: str) -> ConfigChain:
    """A named chain, or comma-separated offsets such as ``"1,2,1"``."""
    if text in CHAINS:
        return CHAINS[text]
    try:
        return ConfigChain(tuple(int(t) for t in text.split(",") if t.strip()))
    except ValueError:
        raise ValueError(f"unknown chain {text!r}; names: {', '.join(CHAINS)}") from None


def blocking_chain(heap: Heap, column: int = 0) -> ConfigChain | None:
    """Configuration of the pieces blocking the highest piece in ``column``.

    None for an empty column, the empty chain for a roof piece.
    """
    col = heap.columns[column]
    if not col:
        return None
    m = heap.m
    base = Piece(col[-1][0], column, col[-1][1])
    above = blockers(heap, column)
    depth = {base: 0}
    offset = {base: 0}
    placed = [base]
    for p in sorted(above):
        # longest chain from the base; ties broken towards the smallest unwrapped offset
        best = None
        for q in placed:
            dc = (p.column - q.column) % m
            if q.height < p.height and dc in (0, 1, m - 1):
                step = 0 if dc == 0 else (1 if dc == 1 else -1)
                key = (-depth[q], abs(offset[q] + step), offset[q] + step)
                if best is None or key < best[0]:
                    best = (key, q, step)
        _, q, step = best
        depth[p] = depth[q] + 1
        offset[p] = offset[q] + step
        placed.append(p)
    ordered = sorted(above, key=lambda p: (depth[p], offset[p]))
    return ConfigChain(tuple(offset[p] for p in ordered))


def make_config(chain: ConfigChain, m: int) -> Heap:
    """Minimal heap whose column-0 top is blocked by exactly ``chain``.

    The blocked piece sits at height 1 in column 0 and every piece is
    positive, so the construction never annihilates.
    """
    heap = Heap(m)
    heap.apply(0, 1, annihilate=False)
    for off in chain.offsets:
        heap.apply(off % m, 1, annihilate=False)
    got = blocking_chain(heap, 0)
    if got != chain:
        raise ValueError(f"chain {chain} is not realizable with m={m} (got {got})")
    return heap


def distinguished_piece(chain: ConfigChain, heap: Heap) -> tuple[int, int] | None:
    """(column, stack index) of the chain's topmost piece in ``make_config`` output."""
    if not chain.offsets:
        return None
    c = chain.offsets[-1] % heap.m
    return c, len(heap.columns[c]) - 1
