"""Runs of a column's roof indicator and Monte Carlo estimates built on them.

All estimators use the signed process.  Work is split over ``replicas``
independent streams, ``SeedSequence(seed).spawn(replicas)``, run on
threads (the kernels release the GIL) and merged in replica order, so the
result depends on ``(seed, replicas)`` only.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .heap import CHAINS, ConfigChain, Heap, blockers, distinguished_piece, make_config
from .process import Trajectory

# per-piece kill probability used for truncation tails (upper end of the wp bound)
WP_UPPER = 0.2


@dataclass
class RunRecord:
    value: int
    length: int
    termination: str  # builds_upward | backtracks | censored
    start_class: str  # short | long | initial
    start_step: int = 0


def _one_run_class(heap: Heap, column: int) -> str:
    col = heap.columns[column]
    if len(col) >= 2 and col[-2][0] == col[-1][0] - 1:
        return "long"
    return "short"


def _zero_run_class(heap: Heap, column: int) -> str:
    if heap.columns[column] and len(blockers(heap, column)) == 1:
        return "short"
    return "long"


def run_lengths(traj: Trajectory, column: int) -> list[RunRecord]:
    """Run-length encode ``X_1, X_2, ...`` for ``column`` by replaying the trajectory.

    The list opens with the leading 0-run (possibly of length 0) and then
    alternates.  A run's class is read from the heap right after the step
    that starts it; its termination from the step that ends it.  The last
    run is censored.
    """
    if not traj.full_resolution:
        raise ValueError("run lengths need a full-resolution trajectory")
    m = traj.config.m
    if not 0 <= column < m:
        raise ValueError(f"column {column} out of range for m={m}")
    heap = traj.initial.copy()
    cur = RunRecord(0, 0, "censored", "initial", 0)
    runs = [cur]
    cols = traj.column.tolist()
    signs = traj.sign.tolist()
    kills = (traj.event == K.ANNIHILATE).tolist()
    for t in range(traj.steps):
        c = cols[t]
        heap.apply(c, signs[t], kills[t])
        x = 1 if heap.column_in_roof(column) else 0
        if x == cur.value:
            cur.length += 1
            continue
        if cur.value == 0:
            cur.termination = "builds_upward" if (c == column and not kills[t]) else "backtracks"
            cls = _one_run_class(heap, column)
        else:
            cur.termination = "backtracks" if kills[t] else "builds_upward"
            cls = _zero_run_class(heap, column)
        cur = RunRecord(x, 1, "censored", cls, t + 1)
        runs.append(cur)
    return runs


@dataclass
class Estimate:
    name: str
    value: float
    std_error: float
    samples: int
    truncation_bias_bound: float = 0.0
    config: dict = field(default_factory=dict)

    def interval(self, z: float = 3.0) -> tuple[float, float]:
        """Range the target can plausibly occupy: z-sigma, plus the truncation tail on top."""
        return self.value - z * self.std_error, self.value + self.truncation_bias_bound + z * self.std_error

    def record(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "std_error": self.std_error,
            "samples": self.samples,
            "truncation_bias_bound": self.truncation_bias_bound,
            **self.config,
        }


def _split(samples: int, replicas: int) -> list[int]:
    base, extra = divmod(samples, replicas)
    return [base + (i < extra) for i in range(replicas)]


def fan_out(kernel, samples: int, seed: int, replicas: int = 1) -> list[np.ndarray]:
    """Run ``kernel(n, rng)`` over seeded replicas and concatenate its outputs."""
    if samples < 1:
        raise ValueError("need at least one sample")
    if replicas < 1:
        raise ValueError("need at least one replica")
    children = np.random.SeedSequence(seed).spawn(replicas)
    jobs = [(n, np.random.default_rng(ss)) for n, ss in zip(_split(samples, replicas), children) if n]
    if len(jobs) == 1:
        parts = [kernel(*jobs[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(jobs)) as pool:
            parts = list(pool.map(lambda job: kernel(*job), jobs))
    return [np.concatenate(arrs) for arrs in zip(*parts)]


def _bernoulli(name: str, flags: np.ndarray, config: dict, bias: float = 0.0) -> Estimate:
    n = len(flags)
    v = float(flags.mean())
    return Estimate(name, v, math.sqrt(v * (1 - v) / n), n, bias, config)


def _blocked_start(chain: ConfigChain | None, m: int, initial: Heap | None) -> Heap:
    heap = initial.copy() if initial is not None else make_config(chain or CHAINS["2-chain"], m)
    if heap.m != m:
        raise ValueError("initial heap has the wrong number of columns")
    if not heap.columns[0] or heap.column_in_roof(0):
        raise ValueError("column 0 must hold a blocked top piece")
    return heap


def zero_run_experiment(m: int, samples: int, seed: int, chain: ConfigChain | None = None,
                        initial: Heap | None = None, replicas: int = 1):
    """(backtrack flags, 0-run lengths) from a blocked column-0 start."""
    heap = _blocked_start(chain, m, initial)
    arrays = K.to_arrays(heap)
    return fan_out(lambda n, rng: K.zero_run_outcomes(*arrays, m, n, rng), samples, seed, replicas)


def estimate_rho(m: int, samples: int, seed: int = 0, chain: ConfigChain | None = None,
                 initial: Heap | None = None, replicas: int = 1) -> Estimate:
    """Probability that a 0-run backtracks, from the 2-chain start by default."""
    back, _ = zero_run_experiment(m, samples, seed, chain, initial, replicas)
    start = str(chain) if chain else ("custom" if initial is not None else "2-chain")
    return _bernoulli("rho", back, {"m": m, "seed": seed, "replicas": replicas, "start": start})


def estimate_zero_run_mean(m: int, samples: int, seed: int = 0, chain: ConfigChain | None = None,
                           replicas: int = 1) -> Estimate:
    """Mean 0-run length from a configuration start (the E(two-box) of the bound ladder)."""
    _, lengths = zero_run_experiment(m, samples, seed, chain, None, replicas)
    x = lengths.astype(float)
    return Estimate("zero_run_mean", float(x.mean()), float(x.std(ddof=1) / math.sqrt(len(x))), len(x),
                    0.0, {"m": m, "seed": seed, "replicas": replicas, "start": str(chain or CHAINS["2-chain"])})


def estimate_wp(m: int, samples: int, horizon: int, seed: int = 0, initial: Heap | None = None,
                column: int = 0, tail_cut: float = 1e-12, replicas: int = 1) -> Estimate:
    """Probability that the roof top of ``column`` is ever annihilated.

    Each replica stops at the kill, at ``horizon`` steps, or once the
    buried piece's tail bound drops below ``tail_cut``.  For a piece under a
    blocking chain of d pieces the remaining kill probability is at most
    ``0.2 ** (d + 1)``: the chain has to be annihilated top down, and any
    piece is annihilated with probability below 1/5 once it reaches the
    roof.  The estimate's ``truncation_bias_bound`` is the mean of these
    tails, so the target lies in ``[value, value + bias]`` up to noise.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    heap = initial.copy() if initial is not None else Heap(m)
    if initial is None:
        heap.apply(column, 1, annihilate=False)
    if heap.m != m or not heap.column_in_roof(column):
        raise ValueError(f"column {column} must hold a roof piece")
    arrays = K.to_arrays(heap)
    hit, tail, _ = fan_out(
        lambda n, rng: K.eventual_kill(*arrays, m, n, column, horizon, tail_cut, WP_UPPER, rng),
        samples, seed, replicas,
    )
    cfg = {"m": m, "seed": seed, "replicas": replicas, "horizon": horizon, "tail_cut": tail_cut,
           "start": "single piece" if initial is None else "custom"}
    return _bernoulli("wp", hit, cfg, float(tail.mean()))


def tilde_experiment(chain: ConfigChain, m: int, samples: int, seed: int = 0, replicas: int = 1):
    """(kill flags, stopping times) of the race behind P-tilde and E-tilde."""
    heap = make_config(chain, m)
    where = distinguished_piece(chain, heap)
    dcol, didx = where if where else (-1, -1)
    arrays = K.to_arrays(heap)
    return fan_out(lambda n, rng: K.kill_before_column0(*arrays, m, n, dcol, didx, rng),
                   samples, seed, replicas)


def estimate_tilde_p(chain: ConfigChain, m: int, samples: int, seed: int = 0, replicas: int = 1) -> Estimate:
    """Probability the chain's topmost piece dies before anything lands in column 0."""
    hit, _ = tilde_experiment(chain, m, samples, seed, replicas)
    return _bernoulli("tilde_p", hit, {"m": m, "seed": seed, "replicas": replicas, "chain": str(chain)})


def estimate_tilde_e(chain: ConfigChain, m: int, samples: int, seed: int = 0, replicas: int = 1) -> Estimate:
    """Mean stopping time of the same race."""
    _, times = tilde_experiment(chain, m, samples, seed, replicas)
    x = times.astype(float)
    return Estimate("tilde_e", float(x.mean()), float(x.std(ddof=1) / math.sqrt(len(x))), len(x), 0.0,
                    {"m": m, "seed": seed, "replicas": replicas, "chain": str(chain)})


def tilde_identity_residual(chain: ConfigChain, m: int, samples: int, seed: int = 0,
                            replicas: int = 1) -> Estimate:
    """Paired estimate of E-tilde/m - (1 - P-tilde); zero in expectation by Wald's identity."""
    hit, times = tilde_experiment(chain, m, samples, seed, replicas)
    d = times / m - (1.0 - hit)
    return Estimate("tilde_identity_residual", float(d.mean()), float(d.std(ddof=1) / math.sqrt(len(d))),
                    len(d), 0.0, {"m": m, "seed": seed, "replicas": replicas, "chain": str(chain)})


def coupling_curve(m: int, init1: Heap, init2: Heap, ns, level: int, reps: int, seed: int = 0,
                   replicas: int = 1) -> np.ndarray:
    """Fraction of coupled replicas whose top ``level`` roofs agree at each n in ``ns``.

    The same replicas are followed through every checkpoint.
    """
    if init1.m != m or init2.m != m:
        raise ValueError("initial heaps must both have m columns")
    if level < 1:
        raise ValueError("level must be >= 1")
    ns = np.asarray(ns, np.int64)
    order = np.argsort(ns, kind="stable")
    a1, a2 = K.to_arrays(init1), K.to_arrays(init2)
    (agree,) = fan_out(
        lambda n, rng: (K.coupled_agreement(*a1, *a2, m, ns[order], level, n, rng),),
        reps, seed, replicas,
    )
    frac = np.empty(len(ns))
    frac[order] = agree.mean(axis=0)
    return frac


def coupling_agreement(m: int, init1: Heap, init2: Heap, n: int, level: int, reps: int,
                       seed: int = 0, replicas: int = 1) -> float:
    return float(coupling_curve(m, init1, init2, [n], level, reps, seed, replicas)[0])
