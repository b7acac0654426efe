"""Spanning trees, 2-approximate TSP/mTSP tours, primal-dual Steiner forest,
monotone subsequences and Eulerian shortcutting."""
from __future__ import annotations

import heapq
from bisect import bisect_left
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import BadParams, Disconnected, EmptyDepotSet, EmptySubset, NotEulerian
from .metric import MetricSpace, induced_submetric


@dataclass(frozen=True)
class Tour:
    vertices: tuple
    weight: float

    def __len__(self):
        return len(self.vertices)


@dataclass
class Forest:
    edges: list  # (u, v, weight)
    components: list = field(default_factory=list)

    @property
    def weight(self) -> float:
        return float(sum(e[2] for e in self.edges))


class UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra
        return ra

    def groups(self):
        out = {}
        for x in self.parent:
            out.setdefault(self.find(x), []).append(x)
        return sorted(sorted(g) for g in out.values())


# --- spanning trees & tours ---------------------------------------------

def prim_forest(k, row, roots):
    """Prim's method seeded with every root at once.

    ``row(i)`` returns the distances from node i to all k nodes.  Seeding
    with several roots is the same as contracting them into one node, so
    the result is a minimum spanning forest with one root per tree.
    Returns (parent array, nodes in order of attachment).
    """
    parent = np.full(k, -1, dtype=np.intp)
    best = np.full(k, np.inf)
    done = np.zeros(k, dtype=bool)
    order = list(roots)
    done[order] = True
    for r in order:
        d = row(r)
        upd = (d < best) & ~done
        best[upd] = d[upd]
        parent[upd] = r
    best[done] = np.inf
    for _ in range(k - len(order)):
        j = int(np.argmin(best))
        done[j] = True
        best[j] = np.inf
        order.append(j)
        d = row(j)
        upd = (d < best) & ~done
        best[upd] = d[upd]
        parent[upd] = j
    return parent, order


def preorder_tours(parent, order, roots):
    """Depth-first preorder of each rooted tree, children in attachment order."""
    children = {}
    rootset = set(roots)
    for j in order:
        if j not in rootset:
            children.setdefault(int(parent[j]), []).append(j)
    out = []
    for r in roots:
        seq = []
        stack = [r]
        while stack:
            v = stack.pop()
            seq.append(v)
            stack.extend(reversed(children.get(v, ())))
        out.append(seq)
    return out


def _unique(seq):
    seen = set()
    out = []
    for v in seq:
        v = int(v)
        if v not in seen:
            seen.add(v)
            out.append(v)
    return out


def approx_tsp_tour(space: MetricSpace, subset, anchor: int) -> Tour:
    """MST doubling with preorder shortcutting, rooted at ``anchor``."""
    verts = _unique(subset)
    if not verts:
        raise EmptySubset("approx_tsp_tour needs a nonempty subset")
    if anchor not in verts:
        raise BadParams(f"anchor {anchor} not in subset")
    return approx_mtsp(space, verts, [anchor])[0]


def approx_mtsp(space: MetricSpace, subset, depots) -> list:
    """One tour per depot covering ``subset``; at most twice the optimum."""
    depots = [int(d) for d in depots]
    if not depots:
        raise EmptyDepotSet("approx_mtsp needs at least one depot")
    if len(set(depots)) != len(depots):
        raise BadParams("depots must be distinct vertices")
    verts = _unique(list(depots) + list(subset))
    sub = induced_submetric(space, verts)
    parent, order = prim_forest(len(verts), sub.row, range(len(depots)))
    tours = []
    for seq in preorder_tours(parent, order, list(range(len(depots)))):
        vs = tuple(verts[i] for i in seq)
        tours.append(Tour(vs, space.tour_weight(vs)))
    return tours


# --- primal-dual Steiner forest -----------------------------------------

_K = 48
_EV_TOL = 1e-9


def steiner_forest(space: MetricSpace, pairs) -> Forest:
    """Goemans-Williamson moat growing followed by reverse delete.

    Moats of active components grow at unit rate.  Edge tight times are
    tracked lazily: each vertex keeps its few nearest candidate edges plus a
    threshold bounding all others, and a heap orders vertices by a lower
    bound on their next tight time.  Reverse delete on the resulting forest
    keeps exactly the edges lying on some pair's tree path.
    """
    pairs = [(int(u), int(v)) for u, v in pairs]
    live = [(u, v) for u, v in pairs if u != v]
    verts = sorted({x for p in live for x in p})
    touched = sorted({x for p in pairs for x in p})
    if not live:
        return Forest([], [[v] for v in touched])
    k = len(verts)
    ix = {v: i for i, v in enumerate(verts)}
    sub = induced_submetric(space, verts)
    pu = np.array([ix[u] for u, _ in live], dtype=np.intp)
    pv = np.array([ix[v] for _, v in live], dtype=np.intp)

    comp = np.arange(k)
    members = [[i] for i in range(k)]
    local = np.zeros(k)
    R0 = np.zeros(k)
    ts = np.zeros(k)
    act = np.ones(k)
    pend = [dict() for _ in range(k)]
    for p in range(len(live)):
        pend[pu[p]][p] = 1
        pend[pv[p]][p] = 1
    n_active = k

    cand = [None] * k
    thr = np.full(k, np.inf)
    ver = [0] * k
    heap = []

    def comp_radius(t):
        return R0 + act * (t - ts)

    def refresh(us, t):
        Rc = comp_radius(t)
        r = local + Rc[comp]
        a = act[comp]
        cu = comp[us]
        for lo in range(0, len(us), 256):
            chunk = us[lo:lo + 256]
            c = cu[lo:lo + 256]
            W = sub.rows(chunk)
            tau = t + (W - r[chunk][:, None] - r[None, :]) / (a[chunk][:, None] + a[None, :])
            tau[c[:, None] == comp[None, :]] = np.inf
            np.maximum(tau, t, out=tau)
            if k > _K + 1:
                part = np.argpartition(tau, _K, axis=1)[:, :_K + 1]
            else:
                part = np.broadcast_to(np.arange(k), (len(chunk), k))
            for row_i, u in enumerate(chunk):
                idx = part[row_i]
                vals = tau[row_i, idx]
                o = np.lexsort((idx, vals))
                idx, vals = idx[o], vals[o]
                if len(idx) > _K:
                    thr[u] = vals[_K]
                    idx, vals = idx[:_K], vals[:_K]
                else:
                    thr[u] = np.inf
                keep = np.isfinite(vals)
                cand[u] = idx[keep]
                key = min(vals[0], thr[u]) if len(vals) else thr[u]
                if np.isfinite(key):
                    ver[u] += 1
                    heapq.heappush(heap, (float(key), int(u), ver[u]))

    def cand_taus(u, t):
        cs = cand[u]
        if cs is None or not len(cs):
            return cs, np.empty(0)
        c0 = comp[u]
        cc = comp[cs]
        w = sub.dists_from(u, cs)
        ru = local[u] + R0[c0] + act[c0] * (t - ts[c0])
        rc = local[cs] + R0[cc] + act[cc] * (t - ts[cc])
        den = act[c0] + act[cc]
        with np.errstate(divide="ignore", invalid="ignore"):
            tau = np.where(den > 0, t + (w - ru - rc) / np.where(den > 0, den, 1), np.inf)
        tau[cc == c0] = np.inf
        return cs, np.maximum(tau, t)

    t = 0.0
    refresh(np.arange(k), t)
    raw_edges = []
    while n_active and heap:
        key, u, vv = heapq.heappop(heap)
        if vv != ver[u] or not act[comp[u]]:
            continue
        cs, tau = cand_taus(u, t)
        finite = np.isfinite(tau)
        if not finite.any() or tau[finite].min() > thr[u]:
            if finite.any() or np.isfinite(thr[u]):
                refresh(np.array([u]), t)
            continue
        keep = finite
        cand[u] = cs[keep]
        cs, tau = cs[keep], tau[keep]
        j = int(np.lexsort((cs, tau))[0])
        tstar = float(tau[j])
        if tstar > key + _EV_TOL * max(1.0, abs(key)):
            ver[u] += 1
            heapq.heappush(heap, (min(tstar, float(thr[u])), u, ver[u]))
            continue
        v = int(cs[j])
        t = max(t, tstar)
        raw_edges.append((u, v))
        # merge components
        cu, cv = int(comp[u]), int(comp[v])
        Rc = comp_radius(t)
        big, small = (cu, cv) if len(members[cu]) >= len(members[cv]) else (cv, cu)
        idx = np.array(members[small], dtype=np.intp)
        local[idx] += Rc[small] - Rc[big]
        comp[idx] = big
        big_old = members[big][:] if not act[big] else None
        members[big].extend(members[small])
        members[small] = []
        R0[big] = Rc[big]
        ts[big] = t
        base, other = (pend[big], pend[small]) if len(pend[big]) >= len(pend[small]) else (pend[small], pend[big])
        for p in other:
            if p in base:
                del base[p]
            else:
                base[p] = 1
        pend[big] = base
        pend[small] = {}
        old_b, old_s = act[big], act[small]
        new = 1.0 if base else 0.0
        n_active -= int(old_b) + int(old_s)
        n_active += int(new)
        act[big] = new
        act[small] = 0.0
        if new:
            wake = []
            if not old_b:
                wake.extend(big_old)
            if not old_s:
                wake.extend(idx.tolist())
            if wake:
                refresh(np.array(sorted(wake), dtype=np.intp), t)
            ver[u] += 1
            heapq.heappush(heap, (tstar, u, ver[u]))

    edges = _prune_to_pair_paths(k, raw_edges, pu, pv)
    out = [(verts[a], verts[b], sub.d(a, b)) for a, b in edges]
    uf = UnionFind()
    for x in touched:
        uf.find(x)
    for a, b, _ in out:
        uf.union(a, b)
    return Forest(out, uf.groups())


def _prune_to_pair_paths(k, raw_edges, pu, pv):
    """Keep the forest edges that lie on the tree path of at least one pair."""
    if not raw_edges:
        return []
    adj = [[] for _ in range(k)]
    for a, b in raw_edges:
        adj[a].append(b)
        adj[b].append(a)
    parent = np.arange(k)
    depth = np.zeros(k, dtype=np.intp)
    seen = np.zeros(k, dtype=bool)
    order = []
    for s in range(k):
        if seen[s] or not adj[s]:
            continue
        seen[s] = True
        dq = deque([s])
        while dq:
            x = dq.popleft()
            order.append(x)
            for y in adj[x]:
                if not seen[y]:
                    seen[y] = True
                    parent[y] = x
                    depth[y] = depth[x] + 1
                    dq.append(y)
    levels = max(1, int(depth.max()).bit_length())
    up = [parent]
    for _ in range(levels - 1):
        up.append(up[-1][up[-1]])
    a, b = pu.copy(), pv.copy()
    swap = depth[a] < depth[b]
    a[swap], b[swap] = b[swap], a[swap]
    diff = depth[a] - depth[b]
    for j in range(levels):
        sel = (diff >> j) & 1 == 1
        a[sel] = up[j][a[sel]]
    for j in reversed(range(levels)):
        ne = up[j][a] != up[j][b]
        a[ne] = up[j][a[ne]]
        b[ne] = up[j][b[ne]]
    lca = np.where(a == b, a, parent[a])
    cnt = np.zeros(k, dtype=np.int64)
    np.add.at(cnt, pu, 1)
    np.add.at(cnt, pv, 1)
    np.add.at(cnt, lca, -2)
    for x in reversed(order):
        if parent[x] != x:
            cnt[parent[x]] += cnt[x]
    keep = set()
    for x in order:
        if parent[x] != x and cnt[x] > 0:
            keep.add((min(x, parent[x]), max(x, parent[x])))
    return [(a_, b_) for a_, b_ in raw_edges if (min(a_, b_), max(a_, b_)) in keep]


# --- monotone subsequences ------------------------------------------------

def _lis(seq):
    tails = []  # values
    tail_idx = []
    pred = [-1] * len(seq)
    for i, x in enumerate(seq):
        p = bisect_left(tails, x)
        if p == len(tails):
            tails.append(x)
            tail_idx.append(i)
        else:
            tails[p] = x
            tail_idx[p] = i
        pred[i] = tail_idx[p - 1] if p > 0 else -1
    out = []
    i = tail_idx[-1] if tail_idx else -1
    while i >= 0:
        out.append(seq[i])
        i = pred[i]
    return out[::-1]


def longest_monotone_subsequence(seq):
    """Longest increasing or decreasing subsequence, whichever is longer.

    Ties go to increasing.  By Erdos-Szekeres the length is at least
    ceil(sqrt(len(seq))).
    """
    seq = list(seq)
    inc = _lis(seq)
    dec = [-x for x in _lis([-x for x in seq])]
    if len(dec) > len(inc):
        return dec, "decreasing"
    return inc, "increasing"


# --- Eulerian shortcutting ------------------------------------------------

def eulerian_shortcut_walk(edges, root: int) -> list:
    """Hierholzer circuit from ``root``, shortcut to first occurrences.

    ``edges`` is a multiset of (u, v) or (u, v, w) tuples.
    """
    root = int(root)
    if not edges:
        return [root]
    adj = {}
    ends = []
    for e in edges:
        u, v = int(e[0]), int(e[1])
        i = len(ends)
        ends.append((u, v))
        adj.setdefault(u, []).append(i)
        adj.setdefault(v, []).append(i)
    odd = [x for x, inc in adj.items() if sum(2 if ends[i][0] == ends[i][1] else 1 for i in inc) % 2]
    if odd:
        raise NotEulerian(f"odd degree at {sorted(odd)[:5]}")
    if root not in adj:
        raise Disconnected(f"root {root} touches no edge")
    used = [False] * len(ends)
    ptr = {x: 0 for x in adj}
    stack = [root]
    circuit = []
    while stack:
        x = stack[-1]
        inc = adj[x]
        p = ptr[x]
        while p < len(inc) and used[inc[p]]:
            p += 1
        ptr[x] = p
        if p == len(inc):
            circuit.append(stack.pop())
        else:
            i = inc[p]
            used[i] = True
            a, b = ends[i]
            stack.append(b if a == x else a)
    if not all(used):
        raise Disconnected("edge set is not connected")
    circuit.reverse()
    return _unique(circuit)
