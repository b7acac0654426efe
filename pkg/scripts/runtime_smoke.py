"""Time one solver on a large coordinate-backed Euclidean instance.

Usage: python3 scripts/runtime_smoke.py {alg1|alg2} [--m 20000] [--vehicles 50] [--capacity 64]
Prints one JSON line with seconds, peak RSS and the certificate/verification status.
"""
import argparse
import json
import resource
import time

from mdarp.alg1 import solve_alg1
from mdarp.alg2 import solve_alg2
from mdarp.generators import generate_instance
from mdarp.routing import verify_solution


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("algorithm", choices=["alg1", "alg2"])
    ap.add_argument("--m", type=int, default=20000)
    ap.add_argument("--vehicles", type=int, default=50)
    ap.add_argument("--capacity", type=int, default=64)
    ap.add_argument("--seed", type=int, default=1)
    a = ap.parse_args()
    inst = generate_instance("euclidean", n=a.m, m=a.m, h=a.vehicles, capacity=a.capacity, seed=a.seed)
    t0 = time.perf_counter()
    sol = solve_alg1(inst) if a.algorithm == "alg1" else solve_alg2(inst)
    secs = time.perf_counter() - t0
    ok = verify_solution(inst, sol).ok
    rss_mb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024.0
    print(json.dumps({"algorithm": a.algorithm, "m": inst.m, "seconds": round(secs, 3),
                      "max_rss_mb": round(rss_mb, 1), "weight": sol.weight,
                      "certificate_ok": sol.meta["certificate"]["ok"], "feasible": ok}))


if __name__ == "__main__":
    main()
