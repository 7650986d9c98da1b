#!/usr/bin/env python3
"""Monte Carlo estimates of rho, the kill probability and P-tilde against their analytic intervals."""
import argparse
from dataclasses import dataclass

from randheap.analytic import rho_bounds, tilde_p_system, wp_bounds
from randheap.heap import CHAINS
from randheap.runstats import estimate_rho, estimate_tilde_p, estimate_wp


@dataclass
class EstimateConfig:
    m: int = 10
    samples: int = 200_000
    seed: int = 0
    replicas: int = 4
    horizon: int = 200_000


def show(name, est, lo, hi):
    e_lo, e_hi = est.interval()
    inside = lo - 3 * est.std_error <= est.value and est.value + est.truncation_bias_bound <= hi + 3 * est.std_error
    print(f"{name:<16} {est.value:.5f} +- {est.std_error:.5f}  3-sigma [{e_lo:.5f}, {e_hi:.5f}]"
          f"  analytic [{float(lo):.5f}, {float(hi):.5f}]  {'ok' if inside else 'OUTSIDE'}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    for name, default in vars(EstimateConfig()).items():
        ap.add_argument(f"--{name}", type=int, default=default)
    cfg = EstimateConfig(**vars(ap.parse_args()))
    kw = dict(seed=cfg.seed, replicas=cfg.replicas)

    rho = rho_bounds()
    show("rho", estimate_rho(cfg.m, cfg.samples, **kw), rho.lo, rho.hi)
    wp = wp_bounds()
    show("wp", estimate_wp(cfg.m, cfg.samples, cfg.horizon, **kw), wp.lo, wp.hi)
    system = tilde_p_system(cfg.m)
    for name, iv in (("2-chain", system.chain2), ("3-chain", system.chain3), ("4-chain", system.chain4)):
        show(f"tilde_p {name}", estimate_tilde_p(CHAINS[name], cfg.m, cfg.samples, **kw), iv.lo, iv.hi)


if __name__ == "__main__":
    main()
