#!/usr/bin/env python3
"""Print every analytic constant of the bound ladder next to its published value."""
import argparse

from randheap.analytic import bounds_report


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, default=10)
    ap.add_argument("--tol", type=float, default=5e-5, help="flag rows whose difference exceeds this")
    args = ap.parse_args()

    rows = bounds_report(args.m)
    width = max(len(r.name) for r in rows)
    print(f"{'name':<{width}}  {'published':>12}  {'computed':>12}  {'abs_diff':>9}")
    for r in rows:
        flag = "  <--" if r.abs_diff > args.tol else ""
        print(f"{r.name:<{width}}  {r.published:>12.7f}  {r.computed:>12.7f}  {r.abs_diff:>9.1e}{flag}")


if __name__ == "__main__":
    main()
