"""Command-line entry point: ``python -m randheap <command> [options]``.

Every file written embeds the resolved configuration so it can be rerun.
Text output is ``key = value`` blocks separated by blank lines.
"""

from __future__ import annotations

import argparse
import contextlib
import math
import sys
from typing import TextIO

import numpy as np

from . import analytic, runstats
from .heap import MIN_COLUMNS, parse_chain
from .process import HeapProcess, ProcessConfig, column_transitions, drift_estimate, run
from .report import TRAJECTORY_COLUMNS, format_record, write_config_comment, write_csv_rows
from .words import normalize, parse_word, word_to_heap, words_equal

COMMANDS = ("simulate", "drift", "runs", "rho", "wp", "tildep", "tildee", "couple", "unsigned",
            "normalize", "equal", "bounds")


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text}")
    return v


def _columns(text: str) -> int:
    v = int(text)
    if v < MIN_COLUMNS:
        raise argparse.ArgumentTypeError(f"m must be >= {MIN_COLUMNS}, got {text}")
    return v


def _probability(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"p must lie in [0, 1], got {text}")
    return v


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(float(t)) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or min(vals) < 0:
        raise argparse.ArgumentTypeError("need nonnegative integers")
    return vals


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--m", type=_columns, default=10, help="number of columns")
    common.add_argument("--seed", type=_nonneg, default=0)
    common.add_argument("--output", "-o", help="write here instead of stdout")
    common.add_argument("--format", choices=("text", "csv"), default="text")

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--p", type=_probability, default=0.5, help="annihilation probability (0.5 = signed)")
    sim.add_argument("--steps", type=_nonneg, default=10**5)
    sim.add_argument("--record-every", type=_positive, default=1)

    mc = argparse.ArgumentParser(add_help=False)
    mc.add_argument("--samples", type=_positive, default=10**5)
    mc.add_argument("--replicas", type=_positive, default=1, help="parallel seeded replicas")

    parser = argparse.ArgumentParser(prog="randheap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("simulate", parents=[common, sim], help="run the p-process and summarise")
    p.add_argument("--chunk", type=_positive, default=10**6, help="steps per flushed chunk")

    sub.add_parser("drift", parents=[common, sim], help="drift estimate and identity check")

    p = sub.add_parser("runs", parents=[common, sim], help="run lengths of one column's roof indicator")
    p.add_argument("--column", type=_nonneg, default=0)

    p = sub.add_parser("rho", parents=[common, mc], help="0-run backtrack probability")
    p.add_argument("--chain", default="2-chain")

    p = sub.add_parser("wp", parents=[common, mc], help="eventual annihilation of a roof piece")
    p.add_argument("--horizon", type=_positive, default=10**5)
    p.add_argument("--tail-cut", type=float, default=1e-12)
    p.add_argument("--column", type=_nonneg, default=0)

    for name, what in (("tildep", "P-tilde"), ("tildee", "E-tilde")):
        p = sub.add_parser(name, parents=[common, mc], help=f"{what} of a blocking chain")
        p.add_argument("--chain", default="2-chain")

    p = sub.add_parser("couple", parents=[common], help="coupled agreement of top roof levels")
    p.add_argument("--init1", default="g0", help="word giving the first initial heap")
    p.add_argument("--init2", default="g1 g3", help="word giving the second initial heap")
    p.add_argument("--n", type=_int_list, default=[100, 1000, 10000], help="comma-separated step counts")
    p.add_argument("--level", type=_positive, default=1)
    p.add_argument("--reps", type=_positive, default=1000)
    p.add_argument("--replicas", type=_positive, default=1)

    p = sub.add_parser("unsigned", parents=[common], help="unsigned heap: roof density and column chain")
    p.add_argument("--steps", type=_positive, default=10**6)
    p.add_argument("--column", type=_nonneg, default=0)

    p = sub.add_parser("normalize", parents=[common], help="normal form of each word read from stdin")
    p.add_argument("--word", action="append", help="word to normalise (repeatable; default: stdin)")

    p = sub.add_parser("equal", parents=[common], help="whether two words are the same group element")
    p.add_argument("word1")
    p.add_argument("word2")

    sub.add_parser("bounds", parents=[common], help="report of every reproduced constant")
    return parser


def _echo(args: argparse.Namespace) -> dict:
    skip = {"output", "word"}
    out = {}
    for k, v in vars(args).items():
        if k in skip or v is None:
            continue
        out[k] = ",".join(map(str, v)) if isinstance(v, list) else v
    return out


def _check_column(args) -> None:
    if args.column >= args.m:
        raise ValueError(f"column {args.column} out of range for m={args.m}")


def _config(args) -> ProcessConfig:
    return ProcessConfig(m=args.m, p=args.p, steps=args.steps, seed=args.seed, record_every=args.record_every)


def cmd_simulate(args, out: TextIO) -> None:
    proc = HeapProcess(_config(args))
    echo = _echo(args)
    if args.format == "csv":
        write_config_comment(echo, out)
        out.write(",".join(TRAJECTORY_COLUMNS) + "\n")
    left = args.steps
    while left > 0:
        # keep chunks aligned with the recording stride
        n = min(left, max(args.chunk - args.chunk % args.record_every, args.record_every))
        records = proc.advance(n)
        left -= n
        if args.format == "csv":
            write_csv_rows(records, out)
        elif left > 0:
            out.write(format_record({"record": "progress", **echo, "steps_run": proc.steps,
                                     "mean_roof_fraction": proc.stats[0] / (proc.steps * args.m)}) + "\n")
        out.flush()
    if args.format == "text":
        summary = proc.trajectory().summary()
        out.write(format_record({"record": "summary", **echo, **summary}))


def cmd_drift(args, out: TextIO) -> None:
    traj = run(_config(args))
    d = drift_estimate(traj)
    _emit(out, args, [{
        "record": "drift", **_echo(args),
        "zeta_hat": d.zeta_hat,
        "one_minus_roof": d.one_minus_roof,
        "predicted": d.predicted,
        "identity_std_error": d.std_error,
        "identity_within_3sigma": abs(d.zeta_hat - d.predicted) < 3 * d.std_error if d.std_error else
        d.zeta_hat == d.predicted,
    }])


def cmd_runs(args, out: TextIO) -> None:
    _check_column(args)
    if args.record_every != 1:
        raise ValueError("runs need --record-every 1")
    traj = run(_config(args))
    runs = runstats.run_lengths(traj, args.column)
    if args.format == "csv":
        write_config_comment(_echo(args), out)
        out.write("index,value,length,termination,start_class,start_step\n")
        for i, r in enumerate(runs):
            out.write(f"{i},{r.value},{r.length},{r.termination},{r.start_class},{r.start_step}\n")
        return
    recs = []
    for value in (0, 1):
        for cls in ("short", "long", "initial"):
            done = [r.length for r in runs if r.value == value and r.start_class == cls
                    and r.termination != "censored"]
            if not done:
                continue
            back = sum(r.termination == "backtracks" for r in runs
                       if r.value == value and r.start_class == cls and r.termination != "censored")
            recs.append({
                "record": "runs", **_echo(args), "value": value, "start_class": cls,
                "count": len(done),
                "mean_length": float(np.mean(done)),
                "std_error": float(np.std(done, ddof=1) / math.sqrt(len(done))) if len(done) > 1 else math.nan,
                "backtrack_fraction": back / len(done),
            })
    _emit(out, args, recs)


def _emit_estimate(args, out, est: runstats.Estimate, extra: dict | None = None) -> None:
    lo, hi = est.interval()
    rec = {"record": "estimate", **_echo(args), **est.record(), "ci3_lo": lo, "ci3_hi": hi, **(extra or {})}
    _emit(out, args, [rec])


def cmd_rho(args, out):
    est = runstats.estimate_rho(args.m, args.samples, args.seed, parse_chain(args.chain), replicas=args.replicas)
    b = analytic.rho_bounds()
    _emit_estimate(args, out, est, {"bound_lo": float(b.lo), "bound_hi": float(b.hi)})


def cmd_wp(args, out):
    _check_column(args)
    est = runstats.estimate_wp(args.m, args.samples, args.horizon, args.seed, column=args.column,
                               tail_cut=args.tail_cut, replicas=args.replicas)
    b = analytic.wp_bounds()
    _emit_estimate(args, out, est, {"bound_lo": float(b.lo), "bound_hi": float(b.hi)})


def cmd_tildep(args, out):
    chain = parse_chain(args.chain)
    est = runstats.estimate_tilde_p(chain, args.m, args.samples, args.seed, args.replicas)
    _emit_estimate(args, out, est, _tilde_bound(chain, args.m))


def cmd_tildee(args, out):
    chain = parse_chain(args.chain)
    est = runstats.estimate_tilde_e(chain, args.m, args.samples, args.seed, args.replicas)
    extra = {}
    iv = _tilde_bound(chain, args.m)
    if iv:
        e = analytic.tilde_e(analytic.Interval(iv["bound_lo"], iv["bound_hi"]), args.m)
        extra = {"bound_lo": e.lo, "bound_hi": e.hi}
    _emit_estimate(args, out, est, extra)


def _tilde_bound(chain, m) -> dict:
    sys_ = analytic.tilde_p_system(m)
    iv = {"2-chain": sys_.chain2, "3-chain": sys_.chain3, "4-chain": sys_.chain4}.get(chain.name)
    return {"bound_lo": iv.lo, "bound_hi": iv.hi} if iv else {}


def cmd_couple(args, out):
    h1 = word_to_heap(parse_word(args.init1, args.m))
    h2 = word_to_heap(parse_word(args.init2, args.m))
    frac = runstats.coupling_curve(args.m, h1, h2, args.n, args.level, args.reps, args.seed, args.replicas)
    recs = []
    for n, f in zip(args.n, frac):
        recs.append({"record": "coupling", **_echo(args), "steps": n, "agreement": float(f),
                     "std_error": math.sqrt(f * (1 - f) / args.reps)})
    _emit(out, args, recs)


def cmd_unsigned(args, out):
    _check_column(args)
    traj = run(ProcessConfig(m=args.m, p=0.0, steps=args.steps, seed=args.seed))
    counts = column_transitions(traj, args.column)
    leave = counts[1, 0] / max(counts[1].sum(), 1)
    join = counts[0, 1] / max(counts[0].sum(), 1)
    _emit(out, args, [{
        "record": "unsigned", **_echo(args),
        "mean_roof_fraction": traj.mean_roof_fraction,
        "column_occupancy": float(np.mean(traj.roof_mask >> np.uint64(args.column) & np.uint64(1))),
        "leave_frequency": float(leave),
        "leave_expected": 2 / args.m,
        "leave_std_error": math.sqrt(2 / args.m * (1 - 2 / args.m) / max(counts[1].sum(), 1)),
        "join_frequency": float(join),
        "join_expected": 1 / args.m,
        "join_std_error": math.sqrt(1 / args.m * (1 - 1 / args.m) / max(counts[0].sum(), 1)),
    }])


def cmd_normalize(args, out):
    lines = args.word if args.word else sys.stdin.read().splitlines()
    if args.output:
        write_config_comment(_echo(args), out)
    for line in lines:
        out.write(str(normalize(parse_word(line.strip(), args.m))) + "\n")


def cmd_equal(args, out):
    same = words_equal(parse_word(args.word1, args.m), parse_word(args.word2, args.m))
    if args.output:
        write_config_comment(_echo(args), out)
    out.write(("true" if same else "false") + "\n")


def cmd_bounds(args, out):
    rows = analytic.bounds_report(args.m)
    if args.format == "csv":
        write_config_comment(_echo(args), out)
        out.write("name,published,computed,abs_diff\n")
        for r in rows:
            out.write(f"{r.name},{r.published!r},{r.computed!r},{r.abs_diff!r}\n")
        return
    out.write(format_record({"record": "config", **_echo(args)}) + "\n")
    out.write("\n".join(format_record({"name": r.name, "published": r.published, "computed": r.computed,
                                       "abs_diff": r.abs_diff}) for r in rows))


def _emit(out: TextIO, args, records: list[dict]) -> None:
    if args.format == "csv":
        write_config_comment(_echo(args), out)
        keys = [k for k in records[0] if k not in _echo(args)] if records else []
        out.write(",".join(keys) + "\n")
        for r in records:
            out.write(",".join(str(r[k]) for k in keys) + "\n")
    else:
        out.write("\n".join(format_record(r) for r in records))


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with contextlib.ExitStack() as stack:
            out = stack.enter_context(open(args.output, "w")) if args.output else sys.stdout
            HANDLERS[args.command](args, out)
    except (ValueError, OSError) as exc:
        print(f"randheap {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0
