"""Words in the locally free group LF_m and their normal forms.

Generators ``g0 ... g{m-1}`` commute unless their indices are adjacent mod m.
A word is read left to right as a sequence of drops, so every word has a
heap and every heap has a unique normal-form word: roof levels from the
deepest to the roof, each level in ascending generator index.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .heap import MIN_COLUMNS, Heap, level_decomposition

_TOKEN = re.compile(r"g(\d+)(\^-1)?")


@dataclass(frozen=True)
class Token:
    index: int
    inverted: bool = False

    @property
    def sign(self) -> int:
        return -1 if self.inverted else 1

    def inverse(self) -> "Token":
        return Token(self.index, not self.inverted)

    def __str__(self) -> str:
        return f"g{self.index}^-1" if self.inverted else f"g{self.index}"


@dataclass(frozen=True)
class Word:
    tokens: tuple[Token, ...]
    m: int

    def __post_init__(self):
        if self.m < MIN_COLUMNS:
            raise ValueError(f"need m >= {MIN_COLUMNS}, got {self.m}")
        for t in self.tokens:
            if not 0 <= t.index < self.m:
                raise ValueError(f"generator index {t.index} out of range for m={self.m}")

    def __len__(self) -> int:
        return len(self.tokens)

    def __str__(self) -> str:
        return " ".join(str(t) for t in self.tokens)

    def __add__(self, other: "Word") -> "Word":
        if self.m != other.m:
            raise ValueError("words over different groups")
        return Word(self.tokens + other.tokens, self.m)


def parse_word(text: str, m: int) -> Word:
    tokens = []
    for raw in text.split():
        match = _TOKEN.fullmatch(raw)
        if match is None:
            raise ValueError(f"malformed token {raw!r}")
        index = int(match.group(1))
        if index >= m:
            raise ValueError(f"generator g{index} does not exist for m={m}")
        tokens.append(Token(index, match.group(2) is not None))
    return Word(tuple(tokens), m)


def word_to_heap(word: Word) -> Heap:
    heap = Heap(word.m)
    for t in word.tokens:
        heap.drop(t.index, t.sign)
    return heap


def heap_to_word(heap: Heap) -> Word:
    tokens = []
    for level in reversed(level_decomposition(heap)):
        tokens.extend(Token(c, s < 0) for c, s in sorted(level))
    return Word(tuple(tokens), heap.m)


def normalize(word: Word) -> Word:
    return heap_to_word(word_to_heap(word))


def words_equal(w1: Word, w2: Word) -> bool:
    if w1.m != w2.m:
        raise ValueError(f"words over different groups (m={w1.m} vs m={w2.m})")
    return normalize(w1) == normalize(w2)


def commute(i: int, j: int, m: int) -> bool:
    """Distinct generators commute unless adjacent mod m; a generator commutes with itself."""
    return (i - j) % m not in (1, m - 1)


def word_roof_levels(word: Word) -> list[int]:
    """Roof level of every letter, computed on the word alone.

    A letter is removable when it commutes with every later letter and no
    later letter uses the same generator.  Level k letters are the
    removable ones once levels 1..k-1 are deleted.
    """
    m = word.m
    level = [0] * len(word)
    remaining = list(range(len(word)))
    k = 0
    while remaining:
        k += 1
        removable = []
        for pos, i in enumerate(remaining):
            a = word.tokens[i]
            later = [word.tokens[j] for j in remaining[pos + 1:]]
            if all(b.index != a.index and commute(a.index, b.index, m) for b in later):
                removable.append(i)
        for i in removable:
            level[i] = k
        remaining = [i for i in remaining if level[i] == 0]
    return level


def normal_form_violations(word: Word) -> list[str]:
    """Check the three normal-form conditions literally, letter pair by letter pair."""
    level = word_roof_levels(word)
    toks = word.tokens
    problems = []
    for x in range(len(toks)):
        for y in range(len(toks)):
            if x == y:
                continue
            a, b = toks[x], toks[y]
            if a.index == b.index and a.inverted != b.inverted and abs(level[x] - level[y]) <= 1:
                problems.append(f"inverse letters at {x},{y} in same or adjacent roofs")
            if level[x] == level[y] and a.index < b.index and y < x:
                problems.append(f"same roof letters at {x},{y} out of index order")
            if level[x] > level[y] and y < x:
                problems.append(f"letter {y} of roof {level[y]} precedes letter {x} of deeper roof {level[x]}")
    return problems
