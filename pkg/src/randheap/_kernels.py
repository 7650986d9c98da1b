"""Compiled inner loops.

Heaps are passed around as three arrays: ``hts[m, cap]`` (int32 heights),
``sgn[m, cap]`` (int8 signs) and ``cnt[m]`` (stack depths).  Stacks grow by
reallocation, so any function that may add pieces returns the arrays.
"""

import numba as nb
import numpy as np

from .heap import Heap

ADD = 0
ANNIHILATE = 1

# annihilation rules
SIGNED = 0  # annihilate iff the dropped sign is opposite to the roof top
COIN = 1  # annihilate with probability p, sign ignored

_jit = nb.njit(cache=True, nogil=True)


def to_arrays(heap: Heap, spare: int = 64):
    m = heap.m
    cap = max((len(c) for c in heap.columns), default=0) + spare
    hts = np.zeros((m, cap), np.int32)
    sgn = np.zeros((m, cap), np.int8)
    cnt = np.zeros(m, np.int64)
    for c, col in enumerate(heap.columns):
        cnt[c] = len(col)
        for i, (h, s) in enumerate(col):
            hts[c, i] = h
            sgn[c, i] = s
    return hts, sgn, cnt


def from_arrays(hts, sgn, cnt, m: int) -> Heap:
    heap = Heap(m)
    heap.columns = [
        list(zip(hts[c, : cnt[c]].tolist(), sgn[c, : cnt[c]].tolist())) for c in range(m)
    ]
    heap.step_count = len(heap)
    return heap


@_jit
def _top(hts, cnt, c):
    n = cnt[c]
    if n == 0:
        return 0
    return hts[c, n - 1]


@_jit
def _in_roof(hts, cnt, m, c):
    h = _top(hts, cnt, c)
    if h == 0:
        return False
    return h > _top(hts, cnt, (c - 1) % m) and h > _top(hts, cnt, (c + 1) % m)


@_jit
def _grow(hts, sgn):
    m, cap = hts.shape
    h2 = np.zeros((m, 2 * cap), hts.dtype)
    s2 = np.zeros((m, 2 * cap), sgn.dtype)
    h2[:, :cap] = hts
    s2[:, :cap] = sgn
    return h2, s2


@_jit
def _step(hts, sgn, cnt, m, c, s, rule, p, rng):
    """One drop; capacity in column c must be available.  Returns (event, stored sign)."""
    n = cnt[c]
    qualifies = _in_roof(hts, cnt, m, c)
    annihilate = False
    if qualifies:
        if rule == SIGNED:
            annihilate = sgn[c, n - 1] != s
        elif p >= 1.0:
            annihilate = True
        elif p > 0.0:
            annihilate = rng.random() < p
    if annihilate:
        cnt[c] = n - 1
        return ANNIHILATE, s
    if qualifies:
        # stacking directly on a roof top keeps the column's sign
        s = sgn[c, n - 1]
    left = _top(hts, cnt, (c - 1) % m)
    right = _top(hts, cnt, (c + 1) % m)
    h = _top(hts, cnt, c)
    if left > h:
        h = left
    if right > h:
        h = right
    hts[c, n] = h + 1
    sgn[c, n] = s
    cnt[c] = n + 1
    return ADD, s


@_jit
def _draw(rng, m):
    k = rng.integers(0, 2 * m)
    if k < m:
        return k, 1
    return k - m, -1


@_jit
def advance(hts, sgn, cnt, m, steps, rule, p, rng, record_every):
    """Run ``steps`` drops.

    Records every ``record_every``-th step.  ``stats`` holds full-resolution
    totals: [sum of post-step roof sizes, annihilations, sum of drift
    residuals, sum of squared residuals], where the residual of a step is
    the size change minus its conditional mean given the pre-step roof.
    """
    nrec = steps // record_every
    rec_step = np.zeros(nrec, np.int64)
    rec_col = np.zeros(nrec, np.int16)
    rec_sign = np.zeros(nrec, np.int8)
    rec_event = np.zeros(nrec, np.int8)
    rec_size = np.zeros(nrec, np.int64)
    rec_roof = np.zeros(nrec, np.int16)
    rec_mask = np.zeros(nrec, np.uint64)
    stats = np.zeros(4)

    rate = 0.5 if rule == SIGNED else p
    roof = np.zeros(m, np.bool_)
    nroof = 0
    mask = np.uint64(0)
    for c in range(m):
        if _in_roof(hts, cnt, m, c):
            roof[c] = True
            nroof += 1
            if m <= 64:
                mask |= np.uint64(1) << np.uint64(c)
    size = 0
    for c in range(m):
        size += cnt[c]

    r = 0
    for t in range(steps):
        c, s = _draw(rng, m)
        if cnt[c] == hts.shape[1]:
            hts, sgn = _grow(hts, sgn)
        expected = 1.0 - 2.0 * rate * nroof / m
        ev, s = _step(hts, sgn, cnt, m, c, s, rule, p, rng)
        if ev == ANNIHILATE:
            size -= 1
            stats[1] += 1
            resid = -1.0 - expected
        else:
            size += 1
            resid = 1.0 - expected
        stats[2] += resid
        stats[3] += resid * resid
        for d in ((c - 1) % m, c, (c + 1) % m):
            now = _in_roof(hts, cnt, m, d)
            if now != roof[d]:
                roof[d] = now
                if now:
                    nroof += 1
                else:
                    nroof -= 1
                if m <= 64:
                    mask ^= np.uint64(1) << np.uint64(d)
        stats[0] += nroof
        if (t + 1) % record_every == 0:
            rec_step[r] = t + 1
            rec_col[r] = c
            rec_sign[r] = s
            rec_event[r] = ev
            rec_size[r] = size
            rec_roof[r] = nroof
            rec_mask[r] = mask
            r += 1
    return hts, sgn, (rec_step, rec_col, rec_sign, rec_event, rec_size, rec_roof, rec_mask), stats


@_jit
def zero_run_outcomes(hts0, sgn0, cnt0, m, samples, rng):
    """From a start where column 0's top is blocked, run until the 0-run ends.

    Returns (backtracked flags, run lengths).
    """
    back = np.zeros(samples, np.int8)
    length = np.zeros(samples, np.int64)
    for i in range(samples):
        hts = hts0.copy()
        sgn = sgn0.copy()
        cnt = cnt0.copy()
        t = 0
        while True:
            c, s = _draw(rng, m)
            if cnt[c] == hts.shape[1]:
                hts, sgn = _grow(hts, sgn)
            _step(hts, sgn, cnt, m, c, s, SIGNED, 0.5, rng)
            t += 1
            if c == 0:
                break
            if _in_roof(hts, cnt, m, 0):
                back[i] = 1
                break
        length[i] = t
    return back, length


@_jit
def kill_before_column0(hts0, sgn0, cnt0, m, samples, dcol, didx, rng):
    """Race between killing the piece at (dcol, didx) and any landing in column 0.

    ``dcol < 0`` means there is no distinguished piece.  Returns (killed
    flags, stopping times).
    """
    hit = np.zeros(samples, np.int8)
    times = np.zeros(samples, np.int64)
    for i in range(samples):
        hts = hts0.copy()
        sgn = sgn0.copy()
        cnt = cnt0.copy()
        t = 0
        while True:
            c, s = _draw(rng, m)
            if cnt[c] == hts.shape[1]:
                hts, sgn = _grow(hts, sgn)
            ev, s = _step(hts, sgn, cnt, m, c, s, SIGNED, 0.5, rng)
            t += 1
            if c == 0:
                break
            if ev == ANNIHILATE and c == dcol and cnt[c] == didx:
                hit[i] = 1
                break
        times[i] = t
    return hit, times


@_jit
def eventual_kill(hts0, sgn0, cnt0, m, samples, ycol, horizon, tail_cut, per_piece, rng):
    """Follow the roof top of ``ycol`` until it is annihilated or safely buried.

    ``w[c]`` counts the pieces of column c lying above the tracked piece
    (the piece itself included in its own column).  Each column's count is
    a chain above the piece, so the longest blocking chain has at least
    ``max(w[ycol] - 1, max_{c != ycol} w[c])`` pieces.  Killing the piece
    requires killing such a chain top down, each kill having probability at
    most ``per_piece`` given the past, so ``per_piece ** (depth + 1)``
    bounds the chance of a kill after the run is cut.  Returns (killed
    flags, tail bounds, steps used).
    """
    hit = np.zeros(samples, np.int8)
    tail = np.zeros(samples)
    used = np.zeros(samples, np.int64)
    w = np.zeros(m, np.int64)
    for i in range(samples):
        hts = hts0.copy()
        sgn = sgn0.copy()
        cnt = cnt0.copy()
        w[:] = 0
        w[ycol] = 1
        bound = per_piece
        t = 0
        while t < horizon:
            c, s = _draw(rng, m)
            if cnt[c] == hts.shape[1]:
                hts, sgn = _grow(hts, sgn)
            ev, s = _step(hts, sgn, cnt, m, c, s, SIGNED, 0.5, rng)
            t += 1
            if ev == ANNIHILATE:
                if w[c] > 0:
                    w[c] -= 1
                    if c == ycol and w[c] == 0:
                        hit[i] = 1
                        break
            elif w[(c - 1) % m] + w[c] + w[(c + 1) % m] > 0:
                w[c] += 1
            depth = w[ycol] - 1
            for d in range(m):
                if d != ycol and w[d] > depth:
                    depth = w[d]
            bound = per_piece ** (depth + 1)
            if bound < tail_cut:
                break
        if hit[i] == 0:
            tail[i] = bound
        used[i] = t
    return hit, tail, used


@_jit
def _levels_agree(hA, sA, cA, hB, sB, cB, m, level):
    dA = cA.copy()
    dB = cB.copy()
    rA = np.zeros(m, np.bool_)
    rB = np.zeros(m, np.bool_)
    for _ in range(level):
        for c in range(m):
            rA[c] = _in_roof(hA, dA, m, c)
            rB[c] = _in_roof(hB, dB, m, c)
        for c in range(m):
            if rA[c] != rB[c]:
                return False
            if rA[c] and sA[c, dA[c] - 1] != sB[c, dB[c] - 1]:
                return False
        for c in range(m):
            if rA[c]:
                dA[c] -= 1
                dB[c] -= 1
    return True


@_jit
def coupled_agreement(hA0, sA0, cA0, hB0, sB0, cB0, m, checkpoints, level, reps, rng):
    """Couple two heaps (same column; signs synchronised on double roof landings).

    ``checkpoints`` must be nondecreasing.  Returns agree[reps, len(checkpoints)].
    """
    k = checkpoints.shape[0]
    agree = np.zeros((reps, k), np.int8)
    for i in range(reps):
        hA = hA0.copy()
        sA = sA0.copy()
        cA = cA0.copy()
        hB = hB0.copy()
        sB = sB0.copy()
        cB = cB0.copy()
        t = 0
        for j in range(k):
            while t < checkpoints[j]:
                c, s = _draw(rng, m)
                if cA[c] == hA.shape[1]:
                    hA, sA = _grow(hA, sA)
                if cB[c] == hB.shape[1]:
                    hB, sB = _grow(hB, sB)
                s2 = s
                if _in_roof(hA, cA, m, c) and _in_roof(hB, cB, m, c):
                    kills = sA[c, cA[c] - 1] != s
                    top2 = sB[c, cB[c] - 1]
                    s2 = -top2 if kills else top2
                _step(hA, sA, cA, m, c, s, SIGNED, 0.5, rng)
                _step(hB, sB, cB, m, c, s2, SIGNED, 0.5, rng)
                t += 1
            if _levels_agree(hA, sA, cA, hB, sB, cB, m, level):
                agree[i, j] = 1
    return agree


@_jit
def reduced_walk_lengths(m, start, samples, rng):
    """Reduced random-walk model of a 1-run; ``start < 0`` means an infinite tower.

    Geometric waits with success 3/m separate walk events; before each
    event the walk stops with probability 2/3, otherwise it moves +-1 and
    is absorbed at 0.
    """
    out = np.zeros(samples, np.int64)
    q = 3.0 / m
    for i in range(samples):
        pos = start
        total = 0
        while True:
            total += rng.geometric(q)
            if rng.random() < 2.0 / 3.0:
                break
            if start >= 0:
                if rng.random() < 0.5:
                    pos += 1
                else:
                    pos -= 1
                    if pos == 0:
                        break
        out[i] = total
    return out
