#!/usr/bin/env python3
"""Roof fraction of the p-annihilation process across p, with batch-means intervals.

The limiting roof density of the signed process (p = 1/2) is not known in
closed form; this sweep is exploratory and only records whether the
estimates move monotonically in p.
"""
import argparse
import time
from dataclasses import asdict, dataclass, field

from randheap.process import is_monotone, p_sweep
from randheap.report import format_record


@dataclass
class SweepConfig:
    ps: list = field(default_factory=lambda: [0.0, 0.25, 0.5, 0.75, 1.0])
    m: int = 10
    steps: int = 1_000_000
    seed: int = 0


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ps", type=lambda s: [float(x) for x in s.split(",")], default=None)
    ap.add_argument("--m", type=int, default=10)
    ap.add_argument("--steps", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    cfg = SweepConfig(m=args.m, steps=args.steps, seed=args.seed)
    if args.ps:
        cfg.ps = args.ps

    t0 = time.perf_counter()
    pts = p_sweep(cfg.ps, cfg.m, cfg.steps, cfg.seed)
    for pt in pts:
        print(format_record({"p": pt.p, "roof_fraction": round(pt.mean_roof_fraction, 6),
                             "ci_lo": round(pt.ci_lo, 6), "ci_hi": round(pt.ci_hi, 6)}))
    print(format_record({**asdict(cfg), "monotone": is_monotone(pts),
                         "seconds": round(time.perf_counter() - t0, 2)}))


if __name__ == "__main__":
    main()
