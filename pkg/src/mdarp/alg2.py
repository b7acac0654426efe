"""Steiner-forest walk solver with dummy padding and a two-level split,
plus the combined solver that keeps the lighter of the two."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .alg1 import solve_alg1
from .errors import LengthMismatch
from .metric import Instance
from .routing import Route, Solution, Stop
from .tours import UnionFind, approx_mtsp, eulerian_shortcut_walk, steiner_forest

REL_TOL = 1e-6
DUMMY = -1  # spec index used for padding requests


@dataclass(frozen=True)
class ComponentWalk:
    vehicle: int
    walk: tuple
    served: tuple  # unit ids ordered by source position along the walk
    served_t: tuple  # same ids ordered by destination position
    n0: int = 0
    n_dummies: int = 0

    @property
    def n_requests(self) -> int:
        return len(self.served)


@dataclass
class WalkSet:
    walks: list
    forest_weight: float
    mtsp_weight: float
    extra: dict = field(default_factory=dict)


def build_component_walks(inst: Instance) -> WalkSet:
    """Union of doubled forest edges and mTSP tour edges, one walk per component.

    A component that ends up with several vehicles is walked by the lowest
    vehicle index; the others get trivial walks.
    """
    metric = inst.metric
    forest = steiner_forest(metric, [(r.src, r.dst) for r in inst.requests])
    depots = list(inst.vehicles)
    tours = approx_mtsp(metric, [r.src for r in inst.requests], depots)
    edges = []
    for a, b, _ in forest.edges:
        edges.append((a, b))
        edges.append((a, b))
    for t in tours:
        vs = t.vertices
        if len(vs) > 1:
            for x, y in zip(vs, vs[1:] + vs[:1]):
                edges.append((x, y))
    uf = UnionFind()
    for v in depots:
        uf.find(v)
    for r in inst.requests:
        uf.union(r.src, r.dst)
    for a, b in edges:
        uf.union(a, b)
    by_root = {}
    for a, b in edges:
        by_root.setdefault(uf.find(a), []).append((a, b))
    units = {}
    for u in inst.unit_requests():
        units.setdefault(uf.find(inst.src(u)), []).append(u)
    walks = []
    owner = {}
    for j, v in enumerate(depots):
        root = uf.find(v)
        if root in owner:
            walks.append(ComponentWalk(j, (v,), (), ()))
            continue
        owner[root] = j
        walk = tuple(eulerian_shortcut_walk(by_root.get(root, []), v))
        pos = {x: i for i, x in enumerate(walk)}
        mine = units.get(root, [])
        ws = tuple(sorted(mine, key=lambda u: (pos[inst.src(u)], u)))
        wt = tuple(sorted(mine, key=lambda u: (pos[inst.dst(u)], u)))
        walks.append(ComponentWalk(j, walk, ws, wt))
    return WalkSet(walks, forest.weight, sum(t.weight for t in tours))


def padded_size(n_w: int, lam: int):
    n0 = math.isqrt(-(-n_w // lam))
    while lam * n0 * n0 < n_w:
        n0 += 1
    return n0, lam * n0 * n0


def pad_dummies(cw: ComponentWalk, lam: int) -> ComponentWalk:
    """Prepend zero-length requests at the vehicle so the count is lam * N_0**2."""
    n0, total = padded_size(cw.n_requests, lam)
    k = total - cw.n_requests
    dummies = tuple((DUMMY, c) for c in range(k))
    return replace(cw, served=dummies + cw.served, served_t=dummies + cw.served_t, n0=n0, n_dummies=k)


def decompose_two_level(W_s, W_t, lam: int, n0: int):
    """Split into lam-sized weakly consistent fragment pairs.

    Level one cuts W_s into n0 blocks of lam*n0 and restricts W_t to each
    block; level two cuts each restricted destination block into n0 pieces of
    lam and restricts the source block to each piece.  Pairs come back in
    order of their first source along W_s.
    """
    W_s, W_t = list(W_s), list(W_t)
    need = lam * n0 * n0
    if len(W_s) != need or len(W_t) != need:
        raise LengthMismatch(f"expected {need} requests on each side, got {len(W_s)} and {len(W_t)}")
    if set(W_s) != set(W_t):
        raise LengthMismatch("source and destination orders cover different ids")
    rank = {u: i for i, u in enumerate(W_s)}
    tpos = {u: i for i, u in enumerate(W_t)}
    big = lam * n0
    out = []
    for i in range(n0):
        bs = W_s[i * big:(i + 1) * big]
        bt = sorted(bs, key=tpos.__getitem__)
        for j in range(n0):
            piece_t = bt[j * lam:(j + 1) * lam]
            ids = set(piece_t)
            piece_s = [u for u in bs if u in ids]
            out.append((tuple(piece_s), tuple(piece_t)))
    out.sort(key=lambda p: rank[p[0][0]])
    return [p[0] for p in out], [p[1] for p in out]


def _loc(inst, u, o, side):
    if u[0] == DUMMY:
        return o
    return inst.src(u) if side == "s" else inst.dst(u)


def walk_route(inst: Instance, cw: ComponentWalk, return_home=False):
    """Route for one walk; returns (route without dummies, padded route weight, padded count)."""
    lam = inst.capacity
    o = inst.vehicles[cw.vehicle]
    if cw.n_requests <= lam:
        frags = [(cw.served, cw.served_t)] if cw.served else []
        cw2 = cw
    else:
        cw2 = pad_dummies(cw, lam)
        bs, bt = decompose_two_level(cw2.served, cw2.served_t, lam, cw2.n0)
        frags = list(zip(bs, bt))
    padded = [o]
    stops = [Stop(o)]
    for fs, ft in frags:
        for u in fs:
            padded.append(_loc(inst, u, o, "s"))
            if u[0] != DUMMY:
                stops.append(Stop(inst.src(u), pickups=(u,)))
        for u in ft:
            padded.append(_loc(inst, u, o, "t"))
            if u[0] != DUMMY:
                stops.append(Stop(inst.dst(u), deliveries=(u,)))
    if return_home and stops[-1].vertex != o:
        stops.append(Stop(o))
        padded.append(o)
    return Route(cw.vehicle, tuple(stops)), inst.metric.walk_weight(padded), cw2.n_requests


def solve_alg2(inst: Instance, return_home: bool = False) -> Solution:
    ws = build_component_walks(inst)
    lam = inst.capacity
    routes = []
    padded_w = 0.0
    m_pad = 0
    max_pad_ratio = 0.0
    for cw in ws.walks:
        r, pw, npad = walk_route(inst, cw, return_home)
        routes.append(r)
        padded_w += pw
        m_pad += npad
        if cw.n_requests:
            max_pad_ratio = max(max_pad_ratio, (npad - cw.n_requests) / cw.n_requests)
    sol = Solution.from_routes(inst, routes, algorithm="alg2")
    d = inst.metric.d
    flow = sum(d(inst.src(u), inst.dst(u)) for u in inst.unit_requests())
    walks_w = sum(inst.metric.tour_weight(cw.walk) for cw in ws.walks)
    base = 2.0 * ws.forest_weight + ws.mtsp_weight
    bound = (8.0 * math.sqrt(m_pad / lam) + 1.0) * base + 2.0 * flow / lam
    sol.meta["certificate"] = {
        "bound": bound,
        "padded_weight": padded_w,
        "padded_requests": m_pad,
        "forest": ws.forest_weight,
        "mtsp": ws.mtsp_weight,
        "walks": walks_w,
        "max_pad_ratio": max_pad_ratio,
        "ok": bool(padded_w <= bound + REL_TOL * max(1.0, padded_w)
                   and sol.weight <= padded_w + REL_TOL * max(1.0, padded_w)
                   and walks_w <= base + REL_TOL * max(1.0, base)
                   and max_pad_ratio <= 3.0),
    }
    return sol


def solve_combined(inst: Instance, seed: int | None = None) -> Solution:
    """Run both solvers and keep the lighter one; ties keep the tour-partitioning result."""
    a = solve_alg1(inst, mode="derandomized")
    b = solve_alg2(inst)
    best = a if a.weight <= b.weight else b
    out = Solution(routes=best.routes, weight=best.weight, algorithm="combined", seed=seed,
                   meta={"alg1_weight": a.weight, "alg2_weight": b.weight,
                         "chosen": best.algorithm, "certificate": best.meta["certificate"]})
    return out
