"""Merge bound on the inconsistent cluster pair: exact per-side tours versus
the merged order and a set of random common orders."""
import argparse
import math

from mdarp.consistent import merge_permutation, tightness_instance
from mdarp.generators import make_rng
from mdarp.oracle import exact_tsp


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[4, 9, 16])
    ap.add_argument("--samples", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = make_rng(args.seed)
    print(f"{'r':>4} {'tsp_s':>6} {'tsp_t':>6} {'merged':>7} {'bound':>8} {'rand_min':>8} {'rand_max':>8}")
    for r in args.sizes:
        Ms, Mt = tightness_instance(r)
        ts, tt = exact_tsp(Ms, range(r)), exact_tsp(Mt, range(r))
        res = merge_permutation(Ms, Mt, ts.witness, tt.witness)
        vals = [Ms.tour_weight(p) + Mt.tour_weight(p) for p in (rng.permutation(r) for _ in range(args.samples))]
        print(f"{r:>4} {ts.value:>6g} {tt.value:>6g} {res.weight:>7g} "
              f"{2 * math.sqrt(r - 1) * (ts.value + tt.value):>8.2f} {min(vals):>8g} {max(vals):>8g}")


if __name__ == "__main__":
    main()
