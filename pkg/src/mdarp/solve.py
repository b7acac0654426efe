"""One entry point for every solver: normalize vehicles, solve, lift back."""
from __future__ import annotations

import time

from .alg1 import solve_alg1
from .alg2 import solve_alg2, solve_combined
from .errors import BadParams
from .improved import solve_improved
from .metric import Instance, normalize_vehicles
from .oracle import OracleLimits, exact_mdarp
from .routing import lift_solution, lower_bounds

ALGORITHMS = ("alg1", "alg1-random", "alg2", "combined", "improved", "exact")


def solve(inst: Instance, algorithm: str, seed=None, theta=None, alpha=None, beta=None,
          max_states=None, with_bounds=True, timing=True):
    if algorithm not in ALGORITHMS:
        raise BadParams(f"unknown algorithm {algorithm!r}")
    t0 = time.perf_counter()
    if algorithm == "exact":
        lim = OracleLimits() if max_states is None else OracleLimits(max_states=int(max_states))
        sol = exact_mdarp(inst, lim).witness
    else:
        norm, mapping = normalize_vehicles(inst)
        if algorithm == "alg1":
            sol = solve_alg1(norm, mode="derandomized", theta=theta)
        elif algorithm == "alg1-random":
            sol = solve_alg1(norm, mode="randomized", seed=0 if seed is None else seed, theta=theta)
        elif algorithm == "alg2":
            sol = solve_alg2(norm)
        elif algorithm == "combined":
            sol = solve_combined(norm, seed)
        else:
            sol = solve_improved(norm, alpha=alpha, beta=beta)
        if norm is not inst:
            sol = lift_solution(sol, inst, mapping)
            sol.meta["merged_vehicles"] = inst.h - norm.h
    sol.runtime_ms = (time.perf_counter() - t0) * 1000.0 if timing else 0.0
    if with_bounds:
        sol.lower_bounds = lower_bounds(inst)
    return sol
