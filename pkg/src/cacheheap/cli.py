"""Command-line workbench: trace replay, fuzz campaigns, benchmarks.

Exit codes: 0 success, 1 check failure, 2 usage error.
Setting HEAP_DEBUG_PHI=1 cross-checks the tracked potential against a full
recomputation around every private block (slow; for debugging).
"""

from __future__ import annotations

import argparse
import sys

from .core import AMORTIZED, WORSTCASE, SIMPLE
from .workbench import (
    VARIANTS, TraceError, bench_dijkstra, emit_metrics, metrics_row, run_trace,
)

POLICY_FLAGS = {"amortized": AMORTIZED, "worstcase": WORSTCASE, "simple": SIMPLE}


def _add_common(p):
    p.add_argument("--variant", choices=VARIANTS, default="nomeld")
    p.add_argument("--policy", choices=sorted(POLICY_FLAGS), default="amortized")
    p.add_argument("--format", choices=("csv", "json-lines"), default="csv",
                   help="metrics format")
    p.add_argument("--metrics-out", metavar="PATH",
                   help="write the metrics row(s) to PATH")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="cacheheap",
        description="Workbench for the violation-cache heap variants.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trace", help="execute a trace file")
    p.add_argument("path", help="trace file ('-' for stdin)")
    _add_common(p)

    p = sub.add_parser("fuzz", help="differential fuzz against the oracle")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", type=int, default=1,
                   help="run this many consecutive seeds")
    p.add_argument("--ops", type=int, default=10_000)
    p.add_argument("--check-every", type=int, default=1000)
    _add_common(p)

    p = sub.add_parser("bench", help="Dijkstra benchmark with verification")
    p.add_argument("--n", type=int, default=1000, help="vertices")
    p.add_argument("--m", type=int, default=10_000, help="edges")
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    policy = POLICY_FLAGS[args.policy]
    rows = []
    try:
        if args.command == "trace":
            if args.path == "-":
                lines = sys.stdin.read().splitlines()
            else:
                with open(args.path) as fh:
                    lines = fh.read().splitlines()
            outputs, row = run_trace(lines, args.variant, policy)
            for line in outputs:
                print(line)
            rows.append(row)
        elif args.command == "fuzz":
            from .verify import FuzzDivergence, fuzz_run
            for seed in range(args.seed, args.seed + args.seeds):
                try:
                    summary = fuzz_run(seed, args.ops, args.variant, policy,
                                       check_every=args.check_every)
                except FuzzDivergence as exc:
                    path = "fuzz-failure-seed%d.trace" % exc.seed
                    with open(path, "w") as fh:
                        fh.write("\n".join(exc.trace) + "\n")
                    print("FAIL %s (replay trace: %s)" % (exc, path),
                          file=sys.stderr)
                    return 1
                print("seed %d: %d ops, %d reduction steps, final size %d, "
                      "%.3fs" % (summary.seed, summary.n_ops,
                                 summary.reduction_steps, summary.final_size,
                                 summary.wall_time))
                row = metrics_row("fuzz-%d" % seed, args.variant, policy,
                                  dict(summary.cases, **summary.counters),
                                  summary.wall_time, summary.final_size)
                rows.append(row)
        else:  # bench
            row, checksum = bench_dijkstra(args.n, args.m, args.seed,
                                           args.variant, policy)
            print("checksum %d" % checksum)
            rows.append(row)
    except (TraceError, AssertionError) as exc:
        print("FAIL %s" % exc, file=sys.stderr)
        return 1
    if args.metrics_out:
        emit_metrics(rows, args.format, args.metrics_out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
