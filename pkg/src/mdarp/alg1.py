"""Tour-partitioning solver built on consistent source/destination tours."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .consistent import TourPair, consistent_tour_sets
from .errors import ThetaOutOfRange
from .metric import Instance
from .routing import Route, Solution, Stop

REL_TOL = 1e-6


@dataclass(frozen=True)
class FragmentPlan:
    theta: int
    fragments_s: tuple  # tuples of unit request ids; the first also starts at the vehicle
    fragments_t: tuple

    @property
    def n_frags(self):
        return len(self.fragments_s)


def n_fragments(i, lam, theta):
    return math.ceil((i - theta) / lam) + 1


def _bounds(i, lam, theta):
    """Half-open index ranges of the fragments."""
    out = [(0, theta)]
    a = theta
    while a < i:
        out.append((a, min(a + lam, i)))
        a += lam
    return out


def partition_fragments(pair: TourPair, lam: int, theta: int) -> FragmentPlan:
    i = len(pair.perm)
    if not 1 <= theta <= min(lam, i):
        raise ThetaOutOfRange(f"theta={theta} outside [1, {min(lam, i)}]")
    frags = tuple(tuple(pair.perm[a:b]) for a, b in _bounds(i, lam, theta))
    return FragmentPlan(theta, frags, frags)


def assemble_route(inst: Instance, pair: TourPair, plan: FragmentPlan | None, lam: int) -> Route:
    """Pick up along each source fragment, then deliver along its destination fragment."""
    o = inst.vehicles[pair.vehicle]
    stops = [Stop(o)]
    frags = plan.fragments_s if plan is not None else (pair.perm,)
    if plan is None and len(pair.perm) > lam:
        raise ThetaOutOfRange("a single fragment needs at most capacity requests")
    for frag in frags:
        for u in frag:
            stops.append(Stop(inst.src(u), pickups=(u,)))
        for u in frag:
            stops.append(Stop(inst.dst(u), deliveries=(u,)))
    return Route(pair.vehicle, tuple(stops))


def theta_weights(inst: Instance, pair: TourPair, lam: int) -> np.ndarray:
    """Route weight for every theta in [1, min(lam, i)], via prefix sums."""
    i = len(pair.perm)
    d = inst.metric.d
    S = [inst.src(u) for u in pair.perm]
    T = [inst.dst(u) for u in pair.perm]
    o = inst.vehicles[pair.vehicle]
    ps = [0.0]
    pt = [0.0]
    for j in range(i - 1):
        ps.append(ps[-1] + d(S[j], S[j + 1]))
        pt.append(pt[-1] + d(T[j], T[j + 1]))
    out = np.empty(min(lam, i))
    for theta in range(1, min(lam, i) + 1):
        w = d(o, S[0])
        prev_end = None
        for a, b in _bounds(i, lam, theta):
            if prev_end is not None:
                w += d(T[prev_end], S[a])
            w += ps[b - 1] - ps[a] + d(S[b - 1], T[a]) + pt[b - 1] - pt[a]
            prev_end = b - 1
        out[theta - 1] = w
    return out


def alg1_certificate(inst: Instance, pairs, weight: float) -> dict:
    d = inst.metric.d
    tours = sum(p.source_tour.weight + p.dest_tour.weight for p in pairs)
    flow = sum(d(inst.src(u), inst.dst(u)) for u in inst.unit_requests())
    bound = 3.0 * tours + 2.0 * flow / inst.capacity
    return {"bound": bound, "tours": tours, "ok": bool(weight <= bound + REL_TOL * max(1.0, weight))}


def solve_alg1(inst: Instance, mode: str = "derandomized", seed: int | None = None,
               theta: int | None = None) -> Solution:
    """Consistent tours, then capacity-sized fragments per tour pair.

    ``mode`` is "randomized" (theta uniform in [1, capacity] per pair, drawn
    from ``seed``) or "derandomized" (theta minimising each pair's route).
    A fixed ``theta`` overrides both.
    """
    lam = inst.capacity
    pairs = consistent_tour_sets(inst)
    rng = np.random.Generator(np.random.PCG64(seed)) if mode == "randomized" else None
    if theta is not None and not 1 <= theta <= lam:
        raise ThetaOutOfRange(f"theta={theta} outside [1, {lam}]")
    routes = []
    thetas = []
    for pair in pairs:
        i = len(pair.perm)
        if i <= lam:
            plan = None
            th = None
            if rng is not None:
                rng.integers(1, lam + 1)  # keep one draw per pair regardless of case
        elif theta is not None:
            th = theta
        elif rng is not None:
            th = int(rng.integers(1, lam + 1))
        else:
            ws = theta_weights(inst, pair, lam)
            th = int(np.argmin(ws)) + 1
        if i > lam:
            plan = partition_fragments(pair, lam, th)
        routes.append(assemble_route(inst, pair, plan, lam))
        thetas.append(th)
    name = "alg1" if mode == "derandomized" and theta is None else "alg1-random" if theta is None else "alg1-theta"
    sol = Solution.from_routes(inst, routes, algorithm=name, seed=seed if rng is not None else None)
    sol.meta["theta"] = thetas
    sol.meta["certificate"] = alg1_certificate(inst, pairs, sol.weight)
    return sol
