import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from randheap import _kernels as K
from randheap.heap import Heap, validate
from randheap.process import (
    HeapProcess,
    ProcessConfig,
    column_indicator,
    column_transitions,
    drift_estimate,
    is_monotone,
    p_sweep,
    reduced_walk_sample,
    reduced_walk_samples,
    roof_fraction_ci,
    run,
    two_state_stationary,
)


def replay(traj):
    """Re-run a trajectory through the pure-Python heap; yields (heap, qualifies, top sign) before each step."""
    heap = traj.initial.copy()
    for c, s, ev in zip(traj.column.tolist(), traj.sign.tolist(), traj.event.tolist()):
        top = heap.top(c)
        yield heap, heap.column_in_roof(c), top.sign if top else 0
        heap.apply(c, s, ev == K.ANNIHILATE)


# --- config


@pytest.mark.parametrize("kw", [dict(m=3), dict(p=-0.1), dict(p=1.5), dict(steps=-1), dict(record_every=0)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        ProcessConfig(**kw)


def test_rule_selection():
    assert ProcessConfig(p=0.5).rule == K.SIGNED
    assert ProcessConfig(p=0.25).rule == K.COIN


# --- the compiled process against the Python heap


@settings(max_examples=30)
@given(st.integers(4, 12), st.integers(0, 2**32), st.integers(0, 3000))
def test_signed_kernel_matches_python_drop(m, seed, steps):
    traj = run(ProcessConfig(m=m, steps=steps, seed=seed))
    heap = Heap(m)
    for t, (c, s) in enumerate(zip(traj.column.tolist(), traj.sign.tolist())):
        ev = heap.drop(c, s)
        assert (traj.event[t] == K.ANNIHILATE) == (type(ev).__name__ == "Annihilated")
        assert traj.heap_size[t] == len(heap)
        assert traj.roof_size[t] == heap.roof_size()
    assert heap == traj.final
    assert validate(traj.final) == []


@settings(max_examples=20)
@given(st.integers(4, 10), st.sampled_from([0.0, 0.2, 0.7, 1.0]), st.integers(0, 2**32))
def test_coin_kernel_rules(m, p, seed):
    traj = run(ProcessConfig(m=m, p=p, steps=2000, seed=seed))
    for t, (heap, qualifies, top_sign) in enumerate(replay(traj)):
        kill = traj.event[t] == K.ANNIHILATE
        if kill:
            assert qualifies
        if p == 0.0:
            assert not kill
        if p == 1.0:
            assert kill == qualifies
        if qualifies and not kill:
            # a surviving piece on a roof top takes the column's sign
            assert traj.sign[t] == top_sign
    assert validate(traj.final) == []


def test_p_zero_never_annihilates():
    traj = run(ProcessConfig(m=10, p=0.0, steps=50_000, seed=1))
    assert traj.annihilations == 0
    assert len(traj.final) == 50_000


def test_steps_zero():
    traj = run(ProcessConfig(steps=0))
    assert traj.steps == 0 and len(traj.step) == 0 and len(traj.final) == 0


def test_determinism():
    cfg = ProcessConfig(m=8, steps=20_000, seed=42)
    a, b = run(cfg), run(cfg)
    for name in ("column", "sign", "event", "heap_size", "roof_size", "roof_mask"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    assert a.final == b.final


def test_chunked_advance_matches_single_run():
    cfg = ProcessConfig(m=7, steps=9000, seed=3)
    whole = run(cfg)
    proc = HeapProcess(cfg)
    for n in (1000, 5000, 3000):
        proc.advance(n)
    parts = proc.trajectory()
    assert np.array_equal(whole.event, parts.event)
    assert np.array_equal(whole.step, parts.step)
    assert whole.final == parts.final
    assert whole.roof_sum == parts.roof_sum


def test_downsampled_summary_uses_full_resolution():
    full = run(ProcessConfig(m=10, steps=10_000, seed=5))
    thin = run(ProcessConfig(m=10, steps=10_000, seed=5, record_every=10))
    assert len(thin.step) == 1000
    assert thin.roof_sum == full.roof_sum
    assert thin.final == full.final
    assert np.array_equal(thin.heap_size, full.heap_size[9::10])
    with pytest.raises(ValueError):
        column_indicator(thin, 0)


def test_initial_heap_and_size_identity():
    init = Heap(6)
    for c in (0, 1, 2):
        init.drop(c, 1)
    traj = run(ProcessConfig(m=6, steps=5000, seed=9), initial=init)
    assert len(traj.final) == len(init) + traj.steps - 2 * traj.annihilations
    assert traj.initial == init


def test_roof_mask_matches_roof_size():
    traj = run(ProcessConfig(m=12, steps=5000, seed=2))
    bits = sum(column_indicator(traj, c).astype(int) for c in range(12))
    assert np.array_equal(bits, traj.roof_size)


# --- drift


def test_drift_all_adds():
    traj = run(ProcessConfig(m=10, p=0.0, steps=1000, seed=0))
    d = drift_estimate(traj)
    assert d.zeta_hat == 1.0 and d.predicted == 1.0


def test_drift_needs_steps():
    with pytest.raises(ValueError):
        drift_estimate(run(ProcessConfig(steps=0)))


def test_drift_identity_signed():
    traj = run(ProcessConfig(m=10, steps=500_000, seed=4))
    d = drift_estimate(traj)
    assert d.predicted == pytest.approx(d.one_minus_roof)
    assert abs(d.zeta_hat - d.one_minus_roof) < 3 * d.std_error


def test_drift_identity_coin():
    traj = run(ProcessConfig(m=10, p=0.8, steps=300_000, seed=4))
    d = drift_estimate(traj)
    assert abs(d.zeta_hat - d.predicted) < 3 * d.std_error


def test_unsigned_roof_fraction_and_drift():
    traj = run(ProcessConfig(m=10, p=0.0, steps=1_000_000, seed=8))
    lo, hi = roof_fraction_ci(traj)
    assert lo - 0.002 < 1 / 3 < hi + 0.002
    assert drift_estimate(traj).one_minus_roof == pytest.approx(2 / 3, abs=0.005)


# --- two-state column chain


@pytest.mark.parametrize("m", [6, 100])
def test_two_state_stationary(m):
    assert two_state_stationary(m) == (Fraction(2, 3), Fraction(1, 3))


def test_two_state_rejects_small_m():
    with pytest.raises(ValueError):
        two_state_stationary(3)


def test_unsigned_column_occupancy_and_transitions():
    m = 10
    traj = run(ProcessConfig(m=m, p=0.0, steps=1_000_000, seed=12))
    x = column_indicator(traj, 3)
    assert abs(x.mean() - 1 / 3) < 0.01
    counts = column_transitions(traj, 3)
    assert counts.sum() == traj.steps
    for state, target in ((1, 2 / m), (0, 1 / m)):
        n = counts[state].sum()
        freq = counts[state, 1 - state] / n
        assert abs(freq - target) < 3 * math.sqrt(target * (1 - target) / n)


# --- reduced walk


def test_reduced_walk_means():
    m = 12
    short = reduced_walk_samples(m, 1, 400_000, seed=1)
    assert short.mean() == pytest.approx((math.sqrt(2) - 1) * m, rel=0.01)
    tower = reduced_walk_samples(m, math.inf, 400_000, seed=2)
    assert tower.mean() == pytest.approx(m / 2, rel=0.01)


def test_reduced_walk_m4():
    assert reduced_walk_samples(4, 1, 400_000, seed=3).mean() == pytest.approx((math.sqrt(2) - 1) * 4, rel=0.01)


def test_reduced_walk_sample_validation():
    rng = np.random.default_rng(0)
    assert reduced_walk_sample(10, 1, rng) >= 1
    with pytest.raises(ValueError):
        reduced_walk_sample(10, 0, rng)
    with pytest.raises(ValueError):
        reduced_walk_sample(3, 1, rng)


def test_reduced_walk_python_oracle():
    """Same model written directly with numpy draws; compare means."""
    rng = np.random.default_rng(77)
    m, n = 10, 40_000
    out = np.empty(n)
    for i in range(n):
        pos, total = 1, 0
        while True:
            total += rng.geometric(3 / m)
            if rng.random() < 2 / 3:
                break
            pos += 1 if rng.random() < 0.5 else -1
            if pos == 0:
                break
        out[i] = total
    ref = reduced_walk_samples(m, 1, n, seed=78)
    se = math.sqrt(out.var() / n + ref.var() / n)
    assert abs(out.mean() - ref.mean()) < 4 * se


# --- p sweep


def test_p_sweep_shape_and_monotone_helper():
    pts = p_sweep([0.0, 1.0], m=8, steps=20_000, seed=1)
    assert [pt.p for pt in pts] == [0.0, 1.0]
    assert all(pt.ci_lo <= pt.mean_roof_fraction <= pt.ci_hi for pt in pts)
    assert is_monotone(pts)
