"""Command line: solve, verify, lb, gen, bench."""
from __future__ import annotations

import argparse
import json
import sys

from .bench import BenchConfig, records_to_csv, run_benchmark
from .errors import LimitExceeded, MdarpError
from .generators import KINDS, generate_instance
from .metric import load_instance, save_instance
from .routing import load_solution, lower_bounds, save_solution, verify_solution
from .solve import solve

EXIT_OK, EXIT_BREACH, EXIT_INPUT, EXIT_LIMIT = 0, 1, 2, 3


def _read(path):
    if path == "-":
        return sys.stdin.buffer.read()
    with open(path, "rb") as fh:
        return fh.read()


def _write(path, data: bytes):
    if path is None or path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        with open(path, "wb") as fh:
            fh.write(data)


def cmd_solve(args):
    inst = load_instance(_read(args.input))
    alg = args.algorithm
    if alg == "alg1" and args.seed is not None and not args.derandomize:
        alg = "alg1-random"
    sol = solve(inst, alg, seed=args.seed, theta=args.theta, alpha=args.alpha, beta=args.beta,
                max_states=args.max_states, with_bounds=not args.no_lb, timing=not args.no_timing)
    _write(args.output, save_solution(sol))
    rep = verify_solution(inst, sol)
    if not rep.ok:
        for b in rep.breaches:
            print(f"breach: {b.kind} route={b.route} stop={b.stop} {b.detail}", file=sys.stderr)
        return EXIT_BREACH
    return EXIT_OK


def cmd_verify(args):
    inst = load_instance(_read(args.instance))
    sol = load_solution(_read(args.solution))
    rep = verify_solution(inst, sol)
    if rep.ok:
        print("OK")
        return EXIT_OK
    for b in rep.breaches:
        print(f"{b.kind}\troute={b.route}\tstop={b.stop}\t{b.detail}")
    return EXIT_BREACH


def cmd_lb(args):
    inst = load_instance(_read(args.input))
    lb = lower_bounds(inst)
    print(json.dumps({"flow": lb.flow_lb, "steiner_forest": lb.steiner_forest_lb,
                      "mtsp": lb.mtsp_lb, "best": lb.best}))
    return EXIT_OK


def cmd_gen(args):
    params = {}
    if args.r is not None:
        params["r"] = args.r
    if args.max_count is not None:
        params["max_count"] = args.max_count
    if args.clusters is not None:
        params["clusters"] = args.clusters
    inst = generate_instance(args.kind, n=args.n, m=args.m, h=args.vehicles, capacity=args.capacity,
                             seed=args.seed, **params)
    _write(args.output, save_instance(inst))
    return EXIT_OK


def cmd_bench(args):
    cfg = BenchConfig.load(args.config)
    recs = run_benchmark(cfg)
    _write(args.csv, records_to_csv(recs).encode("utf-8"))
    bad = sum(1 for r in recs if r.feasible is False)
    return EXIT_BREACH if bad else EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="mdarp", description="Metric multi-vehicle dial-a-ride solvers.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve an instance file")
    s.add_argument("--algorithm", required=True, choices=["alg1", "alg2", "combined", "improved", "exact"])
    s.add_argument("--input", required=True)
    s.add_argument("--output")
    s.add_argument("--seed", type=int)
    s.add_argument("--derandomize", action="store_true")
    s.add_argument("--theta", type=int)
    s.add_argument("--alpha", type=float)
    s.add_argument("--beta", type=float)
    s.add_argument("--max-states", type=int)
    s.add_argument("--no-lb", action="store_true", help="skip lower bounds in the output")
    s.add_argument("--no-timing", action="store_true", help="write runtime_ms as 0")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="check a solution against an instance")
    v.add_argument("--instance", required=True)
    v.add_argument("--solution", required=True)
    v.set_defaults(func=cmd_verify)

    lb = sub.add_parser("lb", help="print lower bounds")
    lb.add_argument("--input", required=True)
    lb.set_defaults(func=cmd_lb)

    g = sub.add_parser("gen", help="generate an instance")
    g.add_argument("--kind", required=True, choices=list(KINDS))
    g.add_argument("--n", type=int, default=10)
    g.add_argument("--m", type=int, default=5)
    g.add_argument("--vehicles", type=int, default=1)
    g.add_argument("--capacity", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--r", type=int)
    g.add_argument("--max-count", type=int)
    g.add_argument("--clusters", type=int)
    g.add_argument("--output")
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("bench", help="run a benchmark config")
    b.add_argument("--config", required=True)
    b.add_argument("--csv")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LimitExceeded as exc:
        print(f"limit exceeded: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except (MdarpError, OSError, ValueError, KeyError, TypeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
