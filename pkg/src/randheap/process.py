"""Random heap processes.

Each step drops a piece in a uniformly chosen column with a uniform sign
(one integer draw in ``[0, 2m)``).  When the piece lands directly on a roof
top the two annihilate with probability ``p``; ``p = 1/2`` is realised by
the signs themselves (opposite signs annihilate), which is the signed heap,
``p = 0`` is the unsigned heap and ``p = 1`` the involutive quotient.  For
other ``p`` a separate coin is flipped, and a surviving piece takes the sign
of the top it lands on so the heap stays a valid signed heap.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels as K
from .heap import MIN_COLUMNS, Heap


@dataclass
class ProcessConfig:
    m: int = 10
    p: float = 0.5
    steps: int = 1000
    seed: int = 0
    record_every: int = 1

    def __post_init__(self):
        if self.m < MIN_COLUMNS:
            raise ValueError(f"need m >= {MIN_COLUMNS}, got {self.m}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if self.steps < 0:
            raise ValueError("steps must be nonnegative")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")

    @property
    def rule(self) -> int:
        return K.SIGNED if self.p == 0.5 else K.COIN

    def echo(self) -> dict:
        return asdict(self)


_FIELDS = ("step", "column", "sign", "event", "heap_size", "roof_size", "roof_mask")


@dataclass
class Trajectory:
    config: ProcessConfig
    initial: Heap
    final: Heap
    step: np.ndarray
    column: np.ndarray
    sign: np.ndarray
    event: np.ndarray
    heap_size: np.ndarray
    roof_size: np.ndarray
    roof_mask: np.ndarray
    # full-resolution totals, see _kernels.advance
    roof_sum: float = 0.0
    annihilations: int = 0
    resid_sum: float = 0.0
    resid_sq: float = 0.0
    steps: int = 0

    @property
    def full_resolution(self) -> bool:
        return self.config.record_every == 1

    @property
    def mean_roof_fraction(self) -> float:
        return self.roof_sum / (self.steps * self.config.m) if self.steps else math.nan

    def summary(self) -> dict:
        d = drift_estimate(self) if self.steps else None
        lo, hi = roof_fraction_ci(self) if self.steps and len(self.roof_size) >= 20 else (math.nan, math.nan)
        return {
            **self.config.echo(),
            "steps_run": self.steps,
            "mean_roof_fraction": self.mean_roof_fraction,
            "roof_fraction_ci_lo": lo,
            "roof_fraction_ci_hi": hi,
            "drift": d.zeta_hat if d else math.nan,
            "one_minus_roof": d.one_minus_roof if d else math.nan,
            "drift_identity_stderr": d.std_error if d else math.nan,
            "annihilations": self.annihilations,
            "final_heap_size": len(self.final),
        }


class HeapProcess:
    """Stateful process, so long runs can be advanced in chunks.

    Advancing in several chunks yields exactly the same path as one call,
    since the generator state carries over between calls.
    """

    def __init__(self, config: ProcessConfig, initial: Heap | None = None):
        self.config = config
        self.initial = initial.copy() if initial is not None else Heap(config.m)
        if self.initial.m != config.m:
            raise ValueError("initial heap has the wrong number of columns")
        self.rng = np.random.default_rng(config.seed)
        self._arrays = K.to_arrays(self.initial)
        self.steps = 0
        self.stats = np.zeros(4)
        self._chunks = []

    @property
    def heap(self) -> Heap:
        heap = K.from_arrays(*self._arrays, self.config.m)
        heap.step_count = self.initial.step_count + self.steps
        heap.annihilation_count = self.initial.annihilation_count + int(self.stats[1])
        return heap

    def advance(self, steps: int) -> tuple:
        cfg = self.config
        if self.steps % cfg.record_every:
            raise ValueError("chunks must keep records aligned with record_every")
        hts, sgn, cnt = self._arrays
        hts, sgn, records, stats = K.advance(
            hts, sgn, cnt, cfg.m, steps, cfg.rule, float(cfg.p), self.rng, cfg.record_every
        )
        records[0][:] += self.steps
        self._arrays = (hts, sgn, cnt)
        self.steps += steps
        self.stats += stats
        self._chunks.append(records)
        return records

    def trajectory(self) -> Trajectory:
        if self._chunks:
            cols = [np.concatenate(parts) for parts in zip(*self._chunks)]
        else:
            cols = [np.zeros(0, np.int64) for _ in _FIELDS]
        return Trajectory(
            self.config,
            self.initial.copy(),
            self.heap,
            *cols,
            roof_sum=float(self.stats[0]),
            annihilations=int(self.stats[1]),
            resid_sum=float(self.stats[2]),
            resid_sq=float(self.stats[3]),
            steps=self.steps,
        )


def run(config: ProcessConfig, initial: Heap | None = None) -> Trajectory:
    proc = HeapProcess(config, initial)
    if config.steps:
        proc.advance(config.steps)
    return proc.trajectory()


@dataclass
class DriftEstimate:
    zeta_hat: float
    one_minus_roof: float
    # 1 - 2p * mean roof / m, equal to one_minus_roof for the signed process
    predicted: float
    # standard error of zeta_hat - predicted
    std_error: float


def drift_estimate(traj: Trajectory) -> DriftEstimate:
    n = traj.steps
    if n < 1:
        raise ValueError("need at least one step")
    m = traj.config.m
    rate = 0.5 if traj.config.rule == K.SIGNED else traj.config.p
    zeta = (len(traj.final) - len(traj.initial)) / n
    roof = traj.roof_sum / n
    var = max(traj.resid_sq / n - (traj.resid_sum / n) ** 2, 0.0)
    return DriftEstimate(zeta, 1.0 - roof / m, 1.0 - 2.0 * rate * roof / m, math.sqrt(var / n))


def roof_fraction_ci(traj: Trajectory, batches: int = 50, z: float = 3.0) -> tuple[float, float]:
    """Batch-means interval for the time-averaged roof fraction."""
    x = traj.roof_size.astype(float) / traj.config.m
    usable = len(x) - len(x) % batches
    if usable < batches:
        raise ValueError("too few records for batch means")
    means = x[:usable].reshape(batches, -1).mean(axis=1)
    centre = traj.mean_roof_fraction
    half = z * means.std(ddof=1) / math.sqrt(batches)
    return centre - half, centre + half


def column_indicator(traj: Trajectory, column: int) -> np.ndarray:
    """Per-step roof indicator of one column (recorded after each drop)."""
    if not traj.full_resolution:
        raise ValueError("trajectory was down-sampled")
    if traj.config.m > 64:
        raise ValueError("roof masks are only recorded for m <= 64")
    if not 0 <= column < traj.config.m:
        raise ValueError(f"column {column} out of range")
    return ((traj.roof_mask >> np.uint64(column)) & np.uint64(1)).astype(np.int8)


def column_transitions(traj: Trajectory, column: int) -> np.ndarray:
    """2x2 matrix of transition counts of a column's roof indicator."""
    x = column_indicator(traj, column)
    first = 1 if traj.initial.column_in_roof(column) else 0
    x = np.concatenate([[first], x])
    counts = np.zeros((2, 2), np.int64)
    np.add.at(counts, (x[:-1], x[1:]), 1)
    return counts


def two_state_stationary(m: int) -> tuple[Fraction, Fraction]:
    """Stationary law of one unsigned column: leave the roof w.p. 2/m, join w.p. 1/m."""
    if m < MIN_COLUMNS:
        raise ValueError(f"need m >= {MIN_COLUMNS}")
    leave, join = Fraction(2, m), Fraction(1, m)
    in_roof = join / (join + leave)
    return 1 - in_roof, in_roof


def reduced_walk_samples(m: int, start: int | float, samples: int, seed=None) -> np.ndarray:
    """Lengths from the reduced 1-run model; ``start = math.inf`` is the infinite tower."""
    if m < MIN_COLUMNS:
        raise ValueError(f"need m >= {MIN_COLUMNS}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return K.reduced_walk_lengths(m, _walk_start(start), samples, rng)


def reduced_walk_sample(m: int, start: int | float, rng: np.random.Generator) -> int:
    return int(reduced_walk_samples(m, start, 1, rng)[0])


def _walk_start(start) -> int:
    if start is None or start == math.inf:
        return -1
    if int(start) != start or start < 1:
        raise ValueError("start must be a positive integer or math.inf")
    return int(start)


@dataclass
class SweepPoint:
    p: float
    mean_roof_fraction: float
    ci_lo: float
    ci_hi: float
    config: dict = field(default_factory=dict)


def p_sweep(ps, m: int = 10, steps: int = 10**6, seed: int = 0) -> list[SweepPoint]:
    """Roof fraction of the p-annihilation process over a grid of p."""
    out = []
    for i, p in enumerate(ps):
        cfg = ProcessConfig(m=m, p=float(p), steps=steps, seed=seed + i)
        traj = run(cfg)
        lo, hi = roof_fraction_ci(traj)
        out.append(SweepPoint(float(p), traj.mean_roof_fraction, lo, hi, cfg.echo()))
    return out


def is_monotone(points: list[SweepPoint]) -> bool:
    """Whether the point estimates are monotone in p (either direction)."""
    vals = [pt.mean_roof_fraction for pt in sorted(points, key=lambda pt: pt.p)]
    diffs = np.diff(vals)
    return bool(np.all(diffs <= 0) or np.all(diffs >= 0))
