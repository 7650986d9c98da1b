import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import build, drop_sequences, random_heap
from randheap.heap import (
    CHAINS,
    Added,
    Annihilated,
    ConfigChain,
    Heap,
    Piece,
    blockers,
    blocking_chain,
    distinguished_piece,
    heap_from_levels,
    level_decomposition,
    make_config,
    new_heap,
    parse_chain,
    upset,
    validate,
)
from randheap.words import parse_word, word_to_heap

LAYERED = "g4^-1 g3^-1 g0 g4 g1 g3 g2 g5"


# brute-force oracles over the explicit piece list


def removable(heap: Heap) -> set[Piece]:
    ps = list(heap.pieces())
    m = heap.m
    out = set()
    for p in ps:
        near = {(p.column + d) % m for d in (-1, 0, 1)}
        if not any(q.column in near and q.height > p.height for q in ps):
            out.add(p)
    return out


def upset_closure(heap: Heap, base: Piece) -> set[Piece]:
    """Transitive closure of 'sits higher in the same or an adjacent column'."""
    ps = list(heap.pieces())
    m = heap.m
    seen = {base}
    frontier = [base]
    while frontier:
        p = frontier.pop()
        for q in ps:
            if q not in seen and q.height > p.height and (q.column - p.column) % m in (0, 1, m - 1):
                seen.add(q)
                frontier.append(q)
    return seen


# --- construction


def test_new_heap():
    h = new_heap(6)
    assert h.m == 6 and len(h) == 0 and h.step_count == 0 and h.annihilation_count == 0
    assert validate(new_heap(4)) == []


def test_new_heap_rejects_small_m():
    with pytest.raises(ValueError):
        new_heap(3)


# --- drop rule


def test_first_drop_lands_at_height_one():
    h = new_heap(6)
    assert h.drop(2, 1) == Added(Piece(1, 2, 1))


def test_opposite_sign_on_roof_annihilates():
    h = Heap.from_pieces(6, [(1, 2, 1)])
    ev = h.drop(2, -1)
    assert ev == Annihilated(Piece(1, 2, 1))
    assert len(h) == 0 and h.annihilation_count == 1


def test_neighbour_raises_landing():
    h = Heap.from_pieces(6, [(1, 2, 1)])
    assert h.drop(3, 1) == Added(Piece(2, 3, 1))


def test_same_sign_on_roof_stacks():
    h = new_heap(6)
    h.drop(2, 1)
    assert h.drop(2, 1) == Added(Piece(2, 2, 1))


def test_opposite_sign_on_blocked_top_stacks():
    h = new_heap(6)
    h.drop(0, 1)
    h.drop(1, 1)  # blocks column 0
    ev = h.drop(0, -1)
    assert isinstance(ev, Added) and ev.height == 3


def test_wraparound_neighbours():
    h = new_heap(5)
    h.drop(4, 1)
    assert h.drop(0, 1) == Added(Piece(2, 0, 1))


def test_drop_rejects_bad_column():
    with pytest.raises(ValueError):
        new_heap(6).drop(6, 1)
    with pytest.raises(ValueError):
        new_heap(6).drop(0, 0)


# --- roof


def test_roof_examples():
    assert new_heap(6).roof() == set()
    assert Heap.from_pieces(6, [(1, 0, 1)]).roof() == {Piece(1, 0, 1)}


def test_layered_roof_matches_brute_force():
    h = word_to_heap(parse_word(LAYERED, 6))
    assert len(h) == 8
    assert h.roof() == removable(h)
    assert {(p.column, p.sign) for p in h.roof()} == {(2, 1), (5, 1)}


# --- validate


def test_validate_flags_adjacent_equal_heights():
    probs = validate(Heap.from_pieces(6, [(1, 0, 1), (1, 1, 1)]))
    assert any("adjacency" in p for p in probs)


def test_validate_flags_missing_support():
    probs = validate(Heap.from_pieces(6, [(2, 0, 1)]))
    assert any("support" in p for p in probs)


def test_validate_flags_sign_change_in_column():
    probs = validate(Heap.from_pieces(6, [(1, 0, 1), (2, 0, -1)]))
    assert any("sign" in p for p in probs)


def test_validate_flags_size_identity():
    h = new_heap(6)
    h.drop(0, 1)
    h.annihilation_count = 1
    assert any("size" in p for p in validate(h))


# --- levels


def test_level_decomposition_examples():
    assert level_decomposition(new_heap(6)) == []
    tower = new_heap(6)
    for _ in range(4):
        tower.drop(0, 1)
    assert level_decomposition(tower) == [frozenset({(0, 1)})] * 4


def test_layered_levels():
    h = word_to_heap(parse_word(LAYERED, 6))
    levels = level_decomposition(h)
    # roof first; the word lists the same levels deepest first
    assert levels == [
        frozenset({(2, 1), (5, 1)}),
        frozenset({(1, 1), (3, 1)}),
        frozenset({(0, 1), (4, 1)}),
        frozenset({(3, -1)}),
        frozenset({(4, -1)}),
    ]
    assert levels[0] == frozenset((p.column, p.sign) for p in h.roof())
    assert heap_from_levels(levels, 6) == h


# --- serialization


def test_dumps_roundtrip_and_signs():
    h = word_to_heap(parse_word(LAYERED, 6))
    text = h.dumps()
    assert '"-"' in text and '"+"' in text
    assert Heap.loads(text) == h
    assert Heap.loads(text).step_count == h.step_count


# --- blocking configurations


def test_blocking_chain_examples():
    assert blocking_chain(new_heap(6)) is None
    assert blocking_chain(Heap.from_pieces(6, [(1, 0, 1)])) == CHAINS["empty"]
    assert blocking_chain(Heap.from_pieces(6, [(1, 0, 1), (2, 1, 1)])) == CHAINS["2-chain"]
    fork = Heap.from_pieces(6, [(1, 0, 1), (2, 1, 1), (2, 5, 1)])
    assert blocking_chain(fork) == CHAINS["fork"]
    three = Heap.from_pieces(6, [(1, 0, 1), (2, 1, 1), (3, 2, 1)])
    assert blocking_chain(three) == CHAINS["3-chain"]


def test_piece_back_over_column_zero_unblocks_it():
    # (3,0) sits on top of column 0 itself, which makes it the roof piece
    h = Heap.from_pieces(6, [(1, 0, 1), (2, 1, 1), (3, 0, 1)])
    assert blocking_chain(h) == CHAINS["empty"]


def test_make_config_examples():
    assert make_config(CHAINS["2-chain"], 6) == Heap.from_pieces(6, [(1, 0, 1), (2, 1, 1)])
    assert make_config(CHAINS["empty"], 6) == Heap.from_pieces(6, [(1, 0, 1)])
    four = make_config(CHAINS["4-chain"], 4)
    assert validate(four) == []
    assert sorted(c for c in range(4) if four.columns[c]) == [0, 1, 2, 3]


@pytest.mark.parametrize("name", sorted(CHAINS))
@pytest.mark.parametrize("m", [4, 5, 6, 10])
def test_make_config_realises_chain(name, m):
    chain = CHAINS[name]
    h = make_config(chain, m)
    assert validate(h) == []
    assert blocking_chain(h) == chain
    assert len(blockers(h)) == len(chain)


def test_make_config_rejects_unrealisable():
    with pytest.raises(ValueError):
        make_config(ConfigChain((1, 0)), 6)


def test_distinguished_piece_is_topmost():
    h = make_config(CHAINS["3-chain"], 10)
    assert distinguished_piece(CHAINS["3-chain"], h) == (2, 0)
    assert h.columns[2][0][0] == 3
    assert distinguished_piece(CHAINS["empty"], make_config(CHAINS["empty"], 10)) is None


def test_parse_chain():
    assert parse_chain("fork") == CHAINS["fork"]
    assert parse_chain("1,2") == CHAINS["3-chain"]
    with pytest.raises(ValueError):
        parse_chain("nope")


# --- properties


@given(drop_sequences())
def test_closure_and_size_identity(seq):
    m, drops = seq
    h, events = build(m, drops)
    assert validate(h) == []
    assert len(h) == len(drops) - 2 * sum(isinstance(e, Annihilated) for e in events)


@given(drop_sequences())
def test_added_height_is_max_of_three_tops_plus_one(seq):
    m, drops = seq
    h = Heap(m)
    for c, s in drops:
        expect = max(h.top_height(c - 1), h.top_height(c), h.top_height(c + 1)) + 1
        ev = h.drop(c, s)
        if isinstance(ev, Added):
            assert ev.height == expect


@given(drop_sequences())
def test_annihilated_piece_was_in_roof(seq):
    m, drops = seq
    h = Heap(m)
    for c, s in drops:
        roof = h.roof()
        ev = h.drop(c, s)
        if isinstance(ev, Annihilated):
            assert ev.victim in roof


@given(drop_sequences(max_len=120))
def test_roof_matches_removability_scan(seq):
    h, _ = build(*seq)
    assert h.roof() == removable(h)
    levels = level_decomposition(h)
    if levels:
        assert levels[0] == frozenset((p.column, p.sign) for p in h.roof())


@given(drop_sequences(max_len=120))
def test_reassembly(seq):
    h, _ = build(*seq)
    assert heap_from_levels(level_decomposition(h), h.m) == h


@given(drop_sequences(max_len=120), st.integers(0, 19))
def test_upset_matches_closure(seq, col):
    h, _ = build(*seq)
    col %= h.m
    if not h.columns[col]:
        return
    top = h.top(col)
    got = {
        Piece(ht, c, s)
        for c, j in upset(h, col).items()
        for ht, s in h.columns[c][j:]
    }
    assert got == upset_closure(h, top)
    assert set(blockers(h, col)) == got - {top}
    assert (len(blockers(h, col)) == 0) == h.column_in_roof(col)


@given(drop_sequences(max_len=120))
def test_levels_count_is_longest_chain(seq):
    h, _ = build(*seq)
    # longest chain through the heap order, computed bottom-up
    ps = sorted(h.pieces())
    m = h.m
    depth = {}
    for p in ps:
        below = [depth[q] for q in depth if q.height < p.height and (q.column - p.column) % m in (0, 1, m - 1)]
        depth[p] = 1 + max(below, default=0)
    assert len(level_decomposition(h)) == max(depth.values(), default=0)


def test_closure_many_random_sequences():
    rng = np.random.default_rng(2024)
    for _ in range(10_000):
        m = int(rng.integers(4, 21))
        h = random_heap(rng, m, int(rng.integers(0, 60)))
        assert not validate(h)


@settings(max_examples=50)
@given(drop_sequences(max_len=80))
def test_json_roundtrip(seq):
    h, _ = build(*seq)
    back = Heap.loads(h.dumps())
    assert back == h and validate(back) == []
