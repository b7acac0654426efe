"""Exact brute-force solvers used as ground truth in tests."""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import LimitExceeded
from .metric import Instance, MetricSpace
from .routing import Route, Solution, Stop
from .tours import Forest, Tour, UnionFind, prim_forest


@dataclass
class OracleResult:
    value: float
    witness: object
    explored: int = 0


@dataclass(frozen=True)
class OracleLimits:
    max_units: int = 8
    max_vehicles: int = 2
    max_vertices: int = 10
    max_states: int = 2_000_000


# --- Held-Karp ------------------------------------------------------------

def _held_karp(D):
    """Subset DP with node 0 as start.

    Returns (dp, par) over the k-1 other nodes: dp[mask, j] is the cheapest
    path from 0 through exactly ``mask`` ending at j.
    """
    k = D.shape[0]
    q = k - 1
    full = 1 << q
    dp = np.full((full, max(q, 1)), np.inf)
    par = np.full((full, max(q, 1)), -1, dtype=np.int8)
    if q == 0:
        return dp, par
    Dq = D[1:, 1:]
    for j in range(q):
        dp[1 << j, j] = D[0, j + 1]
    masks = np.arange(full)
    pop = np.array([bin(x).count("1") for x in range(full)])
    for s in range(2, q + 1):
        layer = masks[pop == s]
        for j in range(q):
            sel = layer[(layer >> j) & 1 == 1]
            prev = sel ^ (1 << j)
            c = dp[prev] + Dq[:, j][None, :]
            a = np.argmin(c, axis=1)
            dp[sel, j] = c[np.arange(len(sel)), a]
            par[sel, j] = a
    return dp, par


def _hk_path(par, mask, j):
    seq = []
    while j >= 0:
        seq.append(j)
        pj = int(par[mask, j])
        mask ^= 1 << j
        j = pj if mask else -1
    return seq[::-1]


def _subset_tour_costs(D):
    """Cheapest tour through node 0 and every subset of the others."""
    q = D.shape[0] - 1
    dp, par = _held_karp(D)
    cost = np.zeros(1 << q)
    last = np.full(1 << q, -1)
    if q:
        c = dp + D[1:, 0][None, :]
        last[1:] = np.argmin(c[1:], axis=1)
        cost[1:] = c[np.arange(1, 1 << q), last[1:]]
    return cost, last, par


def exact_tsp(space: MetricSpace, subset, max_size=16) -> OracleResult:
    verts = list(dict.fromkeys(int(v) for v in subset))
    k = len(verts)
    if k > max_size:
        raise LimitExceeded(f"exact_tsp limited to {max_size} points, got {k}")
    if k <= 1:
        return OracleResult(0.0, Tour(tuple(verts), 0.0), k)
    D = space.table[np.ix_(verts, verts)] if space.has_table else space.sub(verts).table
    cost, last, par = _subset_tour_costs(np.asarray(D))
    full = (1 << (k - 1)) - 1
    seq = [0] + [i + 1 for i in _hk_path(par, full, int(last[full]))]
    vs = tuple(verts[i] for i in seq)
    return OracleResult(float(cost[full]), Tour(vs, space.tour_weight(vs)), (1 << (k - 1)) * (k - 1))


def exact_mtsp(space: MetricSpace, subset, depots, max_size=9, max_depots=3) -> OracleResult:
    """Optimal depot-constrained mTSP: per-depot subset tour costs, then a
    partition DP over the non-depot vertices."""
    depots = [int(d) for d in depots]
    others = [v for v in dict.fromkeys(int(v) for v in subset) if v not in set(depots)]
    if len(others) + len(depots) > max_size or len(depots) > max_depots:
        raise LimitExceeded("exact_mtsp instance too large")
    q = len(others)
    full = (1 << q) - 1
    per = []
    for d in depots:
        verts = [d] + others
        D = space.sub(verts).table
        per.append(_subset_tour_costs(np.asarray(D)))
    # f[i][S]: best cost covering S with the first i+1 depots
    f = [per[0][0].copy()]
    choice = [np.arange(1 << q)]
    for i in range(1, len(depots)):
        ci = per[i][0]
        fi = np.full(1 << q, np.inf)
        ch = np.zeros(1 << q, dtype=np.int64)
        for S in range(1 << q):
            T = S
            while True:
                val = f[-1][S ^ T] + ci[T]
                if val < fi[S]:
                    fi[S] = val
                    ch[S] = T
                if T == 0:
                    break
                T = (T - 1) & S
        f.append(fi)
        choice.append(ch)
    tours = [None] * len(depots)
    S = full
    for i in reversed(range(len(depots))):
        T = int(choice[i][S]) if i else S
        cost, last, par = per[i]
        if T:
            seq = [0] + [j + 1 for j in _hk_path(par, T, int(last[T]))]
            verts = [depots[i]] + others
            vs = tuple(verts[j] for j in seq)
        else:
            vs = (depots[i],)
        tours[i] = Tour(vs, space.tour_weight(vs))
        S ^= T
    return OracleResult(float(f[-1][full]), tours, (1 << q) * len(depots))


# --- Steiner forest -------------------------------------------------------

def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def exact_steiner_forest(space: MetricSpace, pairs, max_vertices=10, max_pairs=8) -> OracleResult:
    """Optimal Steiner forest.

    In a metric an optimal Steiner tree is a minimum spanning tree of some
    vertex superset of its terminals, and an optimal forest splits the pairs
    into groups each spanned by one such tree.  Both choices are enumerated.
    """
    live = [(int(u), int(v)) for u, v in pairs if u != v]
    if not live:
        return OracleResult(0.0, Forest([], []), 0)
    n = space.n
    if n > max_vertices or len(live) > max_pairs:
        raise LimitExceeded("exact_steiner_forest instance too large")
    D = space.table
    mst_w = np.full(1 << n, np.inf)
    mst_e = {}
    for U in range(1, 1 << n):
        vs = [i for i in range(n) if U >> i & 1]
        if len(vs) == 1:
            mst_w[U] = 0.0
            mst_e[U] = []
            continue
        sub = D[np.ix_(vs, vs)]
        parent, order = prim_forest(len(vs), lambda i: sub[i], [0])
        es = [(vs[int(parent[j])], vs[j]) for j in order[1:]]
        mst_w[U] = sum(D[a, b] for a, b in es)
        mst_e[U] = es
    # tree[T] = min over supersets U of T of mst_w[U]
    tree = mst_w.copy()
    arg = np.arange(1 << n)
    for b in range(n):
        for U in range(1 << n):
            if not U >> b & 1:
                W = U | (1 << b)
                if tree[W] < tree[U]:
                    tree[U] = tree[W]
                    arg[U] = arg[W]
    best = math.inf
    wit = None
    explored = 0
    for part in _set_partitions(list(range(len(live)))):
        explored += 1
        total = 0.0
        masks = []
        for group in part:
            T = 0
            for p in group:
                T |= (1 << live[p][0]) | (1 << live[p][1])
            total += tree[T]
            masks.append(int(arg[T]))
        if total < best - 1e-12:
            best = total
            wit = masks
    edges = []
    uf = UnionFind()
    for U in wit:
        for a, b in mst_e[U]:
            edges.append((a, b, float(D[a, b])))
            uf.union(a, b)
    return OracleResult(float(best), Forest(edges, uf.groups()), explored)


# --- common permutation ---------------------------------------------------

def exact_consistent_pair(Ms: MetricSpace, Mt: MetricSpace, max_r=8) -> OracleResult:
    """Cheapest tour in the summed metric over all (r-1)! rooted orders."""
    r = Ms.n
    if Mt.n != r:
        raise ValueError("source and destination metrics differ in size")
    if r > max_r:
        raise LimitExceeded(f"exact_consistent_pair limited to r <= {max_r}")
    if r <= 1:
        return OracleResult(0.0, tuple(range(r)), 1)
    L = np.asarray(Ms.table) + np.asarray(Mt.table)
    perms = np.array(list(itertools.permutations(range(1, r))), dtype=np.intp)
    perms = np.hstack([np.zeros((len(perms), 1), dtype=np.intp), perms])
    w = L[perms, np.roll(perms, -1, axis=1)].sum(axis=1)
    i = int(np.argmin(w))
    return OracleResult(float(w[i]), tuple(int(x) for x in perms[i]), len(perms))


# --- exact mDaRP ----------------------------------------------------------

def exact_mdarp(inst: Instance, limits: OracleLimits | None = None) -> OracleResult:
    """A* over (vehicle positions, per-spec waiting / on-board counts).

    Copies of one spec are interchangeable, so statuses are stored as counts.
    Arriving at a vertex delivers everything destined there; pickups are a
    chosen count per spec.  The heuristic is the largest remaining distance
    any single request still needs, which is consistent.
    """
    lim = limits or OracleLimits()
    if inst.m > lim.max_units or inst.h > lim.max_vehicles or inst.n > lim.max_vertices:
        raise LimitExceeded(
            f"exact_mdarp limits: m<={lim.max_units}, h<={lim.max_vehicles}, n<={lim.max_vertices}")
    D = inst.metric.table
    h = inst.h
    lam = inst.capacity
    specs = inst.requests
    P = len(specs)
    src = [r.src for r in specs]
    dst = [r.dst for r in specs]
    # state: (positions, counts) with counts[i] = (waiting, on_0, ..., on_{h-1})
    start = (tuple(inst.vehicles), tuple((r.count,) + (0,) * h for r in specs))

    def heur(state):
        pos, cnt = state
        best = 0.0
        for i in range(P):
            c = cnt[i]
            if c[0]:
                best = max(best, min(D[p, src[i]] for p in pos) + D[src[i], dst[i]])
            for v in range(h):
                if c[1 + v]:
                    best = max(best, D[pos[v], dst[i]])
        return best

    def load(cnt, v):
        return sum(c[1 + v] for c in cnt)

    def successors(state):
        pos, cnt = state
        for v in range(h):
            here = pos[v]
            targets = set()
            for i in range(P):
                if cnt[i][0]:
                    targets.add(src[i])
                if cnt[i][1 + v]:
                    targets.add(dst[i])
            for x in sorted(targets):
                # deliver on arrival
                c2 = [list(c) for c in cnt]
                dv = {}
                for i in range(P):
                    if dst[i] == x and c2[i][1 + v]:
                        dv[i] = c2[i][1 + v]
                        c2[i][1 + v] = 0
                free = lam - sum(c[1 + v] for c in c2)
                avail = [i for i in range(P) if src[i] == x and c2[i][0]]
                ranges = [range(min(c2[i][0], free) + 1) for i in avail]
                for picks in itertools.product(*ranges):
                    tot = sum(picks)
                    if tot > free or (tot == 0 and not dv):
                        continue
                    if x == here and tot == 0:
                        continue
                    c3 = [c[:] for c in c2]
                    pk = {}
                    for i, k in zip(avail, picks):
                        if k:
                            pk[i] = k
                            c3[i][0] -= k
                            if dst[i] != x:
                                c3[i][1 + v] += k
                    npos = pos[:v] + (x,) + pos[v + 1:]
                    yield (npos, tuple(tuple(c) for c in c3)), D[here, x], (v, x, dv, pk)

    def is_goal(state):
        return all(not any(c) for c in state[1])

    g = {start: 0.0}
    parent = {start: None}
    tie = itertools.count()
    heap = [(heur(start), 0.0, next(tie), start)]
    closed = set()
    explored = 0
    goal = None
    while heap:
        f, gc, _, s = heapq.heappop(heap)
        if s in closed:
            continue
        closed.add(s)
        explored += 1
        if explored > lim.max_states:
            raise LimitExceeded(f"exact_mdarp explored more than {lim.max_states} states")
        if is_goal(s):
            goal = s
            break
        for s2, c, act in successors(s):
            if s2 in closed:
                continue
            g2 = gc + c
            if g2 < g.get(s2, math.inf) - 1e-15:
                g[s2] = g2
                parent[s2] = (s, act)
                heapq.heappush(heap, (g2 + heur(s2), g2, next(tie), s2))
    actions = []
    s = goal
    while parent[s] is not None:
        s, act = parent[s]
        actions.append(act)
    actions.reverse()
    return OracleResult(float(g[goal]), _replay(inst, actions), explored)


def _replay(inst: Instance, actions) -> Solution:
    stops = [[Stop(v)] for v in inst.vehicles]
    next_copy = [0] * len(inst.requests)
    onboard = [[[] for _ in inst.requests] for _ in inst.vehicles]
    for v, x, dv, pk in actions:
        dl = []
        for i, k in sorted(dv.items()):
            dl.extend(onboard[v][i][:k])
            del onboard[v][i][:k]
        pl = []
        for i, k in sorted(pk.items()):
            ids = [(i, c) for c in range(next_copy[i], next_copy[i] + k)]
            next_copy[i] += k
            pl.extend(ids)
            if inst.requests[i].dst == x:
                dl.extend(ids)
            else:
                onboard[v][i].extend(ids)
        stops[v].append(Stop(x, tuple(pl), tuple(dl)))
    routes = [Route(v, tuple(s)) for v, s in enumerate(stops)]
    return Solution.from_routes(inst, routes, algorithm="exact")
