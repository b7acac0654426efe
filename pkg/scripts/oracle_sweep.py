"""Compare every heuristic solver with the exact optimum on small random instances."""
import argparse
import json

import numpy as np

from mdarp.generators import generate_instance, make_rng
from mdarp.oracle import exact_mdarp
from mdarp.routing import lower_bounds, verify_solution
from mdarp.solve import solve

SOLVERS = ("alg1", "alg1-random", "alg2", "combined", "improved")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = make_rng(args.seed)
    ratios = {a: [] for a in SOLVERS}
    infeasible = {a: 0 for a in SOLVERS}
    lb_gap = []
    for k in range(args.count):
        kind = ("euclidean", "clustered", "random", "line")[k % 4]
        h = int(rng.integers(1, 3))
        inst = generate_instance(kind, n=int(rng.integers(h + 1, 8)), m=int(rng.integers(1, 5)), h=h,
                                 capacity=int(rng.integers(1, 4)), seed=args.seed * 1000 + k, max_count=2)
        opt = exact_mdarp(inst).value
        lb_gap.append(lower_bounds(inst).best / opt if opt > 0 else 1.0)
        for alg in SOLVERS:
            sol = solve(inst, alg, seed=k, with_bounds=False, timing=False)
            infeasible[alg] += not verify_solution(inst, sol).ok
            ratios[alg].append(sol.weight / opt if opt > 0 else 1.0)
    out = {"instances": args.count, "best_lb_over_opt_min": float(np.min(lb_gap))}
    for alg in SOLVERS:
        r = np.array(ratios[alg])
        out[alg] = {"mean_ratio": round(float(r.mean()), 4), "max_ratio": round(float(r.max()), 4),
                    "infeasible": infeasible[alg]}
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
