"""Size-classified solver: small requests by the forest walks, big ones by
shuttling, normal ones by rescaling to a unit instance, solving it, and
re-solving each unfolded route as a weighted dial-a-ride on a line."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .alg1 import solve_alg1
from .alg2 import solve_alg2
from .errors import BadParams, DegenerateScaling, NoSegmentForSpec, SizeExceedsCapacity
from .metric import Instance
from .routing import Route, Solution, Stop
from .tours import approx_mtsp

REL_TOL = 1e-6


# --- classification & rescaling -----------------------------------------

@dataclass(frozen=True)
class RequestClassification:
    alpha: float
    beta: float
    small: tuple
    normal: tuple
    big: tuple


def default_alpha_beta(n):
    if n < 2:
        raise BadParams("classification needs n >= 2")
    ln = math.log(n)
    return n / ln, math.sqrt(n * ln)


def classify_requests(inst: Instance, alpha=None, beta=None) -> RequestClassification:
    """small if N < cap/alpha, else big if N > cap/beta, else normal."""
    a0, b0 = default_alpha_beta(inst.n)
    alpha = a0 if alpha is None else float(alpha)
    beta = b0 if beta is None else float(beta)
    lam = inst.capacity
    small, normal, big = [], [], []
    for i, r in enumerate(inst.requests):
        if r.count < lam / alpha:
            small.append(i)
        elif r.count > lam / beta:
            big.append(i)
        else:
            normal.append(i)
    return RequestClassification(alpha, beta, tuple(small), tuple(normal), tuple(big))


@dataclass(frozen=True)
class ScaledInstance:
    gamma: float
    cap_hat: float
    sizes_hat: tuple
    cap_tilde: int
    sizes_tilde: tuple
    specs: tuple  # original spec index of each scaled spec
    unit_instance: Instance


def rescale_normal_requests(inst: Instance, normal, alpha: float) -> ScaledInstance:
    if alpha < 1:
        raise DegenerateScaling(f"alpha={alpha} < 1")
    lam = inst.capacity
    gamma = lam / alpha
    cap_t = math.floor(alpha)
    sizes_t = []
    for i in normal:
        q = inst.requests[i].count / gamma
        sizes_t.append(max(1, math.ceil(q - 1e-9 * max(1.0, q))))
    sizes_h = tuple(s * gamma for s in sizes_t)
    unit = inst.replace(capacity=cap_t,
                        requests=tuple((inst.requests[i].src, inst.requests[i].dst, s)
                                       for i, s in zip(normal, sizes_t)))
    return ScaledInstance(gamma, cap_t * gamma, sizes_h, cap_t, tuple(sizes_t), tuple(normal), unit)


# --- big requests ---------------------------------------------------------

def serve_big_requests(inst: Instance, big):
    """Full-load shuttles at each big source, visited along a depot mTSP.

    Returns (one route per vehicle, bound) where bound is the tour weight plus
    2 * ceil(N / cap) * d(s, t) per spec.
    """
    lam = inst.capacity
    d = inst.metric.d
    by_src = {}
    for i in big:
        by_src.setdefault(inst.requests[i].src, []).append(i)
    routes = [Route(j, (Stop(v),)) for j, v in enumerate(inst.vehicles)]
    if not big:
        return routes, 0.0
    tours = approx_mtsp(inst.metric, sorted(by_src), list(inst.vehicles))
    bound = sum(t.weight for t in tours)
    for j, tour in enumerate(tours):
        stops = [Stop(inst.vehicles[j])]
        for x in tour.vertices:
            for i in by_src.get(x, ()):
                r = inst.requests[i]
                trips = -(-r.count // lam)
                bound += 2.0 * trips * d(r.src, r.dst)
                for k in range(trips):
                    chunk = tuple((i, c) for c in range(k * lam, min(r.count, (k + 1) * lam)))
                    if r.src == r.dst:
                        stops.append(Stop(x, pickups=chunk, deliveries=chunk))
                    else:
                        stops.append(Stop(x, pickups=chunk))
                        stops.append(Stop(r.dst, deliveries=chunk))
        routes[j] = Route(j, tuple(stops))
    return routes, bound


# --- line instances -------------------------------------------------------

@dataclass
class LineInstance:
    positions: np.ndarray  # nondecreasing, positions[0] = 0 is the vehicle
    segments: list  # (key, a, b) point indices, a <= b
    sizes: dict = field(default_factory=dict)  # key -> size, default 1
    vertices: tuple = ()  # original vertex of each point, when unfolded from a route
    vehicle: int = 0

    @property
    def length(self) -> float:
        return float(self.positions[-1]) if len(self.positions) else 0.0

    def size(self, key):
        return self.sizes.get(key, 1)

    def seg_len(self, seg):
        return float(self.positions[seg[2]] - self.positions[seg[1]])

    def flow_lb(self, capacity) -> float:
        return sum(self.size(s[0]) * self.seg_len(s) for s in self.segments) / capacity

    def steiner_lb(self) -> float:
        return max((float(self.positions[s[2]]) for s in self.segments), default=0.0)


def unfold_route_to_line(route: Route, metric) -> LineInstance:
    """Lay the route's hops end to end; every served unit becomes a segment."""
    vs = route.vertices()
    pos = [0.0]
    total = 0.0
    for a, b in zip(vs, vs[1:]):
        total += metric.d(a, b)
        pos.append(total)
    picked = {}
    segs = []
    for k, st in enumerate(route.stops):
        for u in st.pickups:
            picked[tuple(u)] = k
        for u in st.deliveries:
            u = tuple(u)
            segs.append((u, picked[u], k))
    segs.sort(key=lambda s: (s[1], s[2], s[0]))
    return LineInstance(np.array(pos), segs, {}, tuple(vs), route.vehicle)


def assign_and_trim(lines, sizes: dict):
    """Give each spec its single shortest segment, then cut every line after
    its last chosen endpoint.  Segment keys on the output are spec indices."""
    best = {}
    for li, line in enumerate(lines):
        for seg in line.segments:
            spec = seg[0][0]
            if spec not in sizes:
                continue
            cand = (line.seg_len(seg), li, seg[1], seg[2], seg[0])
            if spec not in best or cand < best[spec]:
                best[spec] = cand
    missing = [s for s in sizes if s not in best]
    if missing:
        raise NoSegmentForSpec(f"no segment for specs {missing[:5]}")
    chosen = [[] for _ in lines]
    for spec in sorted(best):
        _, li, a, b, _ = best[spec]
        chosen[li].append((spec, a, b))
    out = []
    for line, segs in zip(lines, chosen):
        end = max((s[2] for s in segs), default=0)
        out.append(LineInstance(line.positions[:end + 1].copy(), sorted(segs, key=lambda s: (s[1], s[2], s[0])),
                                {s[0]: sizes[s[0]] for s in segs}, tuple(line.vertices[:end + 1]), line.vehicle))
    return out


def _greedy_line_stops(line: LineInstance, segs, capacity):
    """Rightward sweeps: deliver, then load by earliest delivery while it fits;
    when empty with work behind, go back to the leftmost unserved pickup."""
    waiting = sorted(segs, key=lambda s: (s[1], s[2], repr(s[0])))
    onboard = {}
    load = 0
    cur = 0
    stops = []
    while True:
        dl = tuple(sorted((k for k, (b, _) in onboard.items() if b == cur), key=repr))
        for k in dl:
            load -= onboard.pop(k)[1]
        pk = []
        for s in sorted((s for s in waiting if s[1] == cur), key=lambda s: (s[2], repr(s[0]))):
            sz = line.size(s[0])
            if load + sz <= capacity:
                load += sz
                onboard[s[0]] = (s[2], sz)
                pk.append(s)
        if pk:
            taken = {s[0] for s in pk}
            waiting = [s for s in waiting if s[0] not in taken]
        stops.append(Stop(cur, tuple(s[0] for s in pk), dl))
        if onboard:
            nxt = min(b for b, _ in onboard.values())
            ahead = [s[1] for s in waiting if s[1] > cur]
            if ahead:
                nxt = min(nxt, min(ahead))
        elif waiting:
            nxt = min(s[1] for s in waiting)
        else:
            break
        cur = nxt
    return stops


def _load_array(line, items, n):
    a = np.zeros(n)
    for s in items:
        a[s[1]:s[2]] += line.size(s[0])
    return a


def _evict_levels(line, segs, capacity, key):
    """Sweep left to right keeping what fits; whatever is evicted at an
    overload (smallest key first) forms the next level."""
    n = len(line.positions)
    rest = list(segs)
    levels = []
    while rest:
        start = {}
        for i, s in enumerate(rest):
            start.setdefault(s[1], []).append(i)
        act, out = [], set()
        for x in range(n - 1):
            act = [i for i in act if rest[i][2] > x]
            act.extend(start.get(x, ()))
            tot = sum(line.size(rest[i][0]) for i in act)
            while tot > capacity:
                v = min(act, key=lambda i: key(rest[i], x, line))
                act.remove(v)
                out.add(v)
                tot -= line.size(rest[v][0])
        levels.append([s for i, s in enumerate(rest) if i not in out])
        rest = [rest[i] for i in sorted(out)]
    return levels


def _first_fit_levels(line, segs, capacity):
    n = len(line.positions)
    levels = []
    for s in sorted(segs, key=lambda s: (s[1], -s[2], repr(s[0]))):
        sz = line.size(s[0])
        for arr, items in levels:
            if (arr[s[1]:s[2]] + sz <= capacity).all():
                arr[s[1]:s[2]] += sz
                items.append(s)
                break
        else:
            levels.append((_load_array(line, [s], n), [s]))
    return [items for _, items in levels]


def _components(items):
    """Split a level into maximal overlapping runs: (p, q, items)."""
    out = []
    for s in sorted(items, key=lambda s: (s[1], s[2], repr(s[0]))):
        if out and s[1] < out[-1][1]:
            p, q, its = out[-1]
            out[-1] = (p, max(q, s[2]), its + [s])
        else:
            out.append((s[1], s[2], [s]))
    return out


def _union_len(P, items):
    return sum(float(P[q] - P[p]) for p, q, _ in _components(items))


def _improve_levels(line, capacity, levels, rounds=50):
    """Move single items between levels while the total covered length drops.
    Route cost is about twice that total, so this is the packing objective."""
    P = line.positions
    n = len(P)
    levels = [list(lv) for lv in levels]
    loads = [_load_array(line, lv, n) for lv in levels]
    U = [_union_len(P, lv) for lv in levels]
    for _ in range(rounds):
        changed = False
        for i in range(len(levels)):
            for s in list(levels[i]):
                sz = line.size(s[0])
                rest = [x for x in levels[i] if x is not s]
                ui = _union_len(P, rest)
                best = None
                for j in range(len(levels) + 1):
                    if j == i:
                        continue
                    if j == len(levels):
                        gain = U[i] - ui - float(P[s[2]] - P[s[1]])
                    elif (loads[j][s[1]:s[2]] + sz > capacity).any():
                        continue
                    else:
                        gain = U[i] - ui - (_union_len(P, levels[j] + [s]) - U[j])
                    if gain > 1e-9 and (best is None or gain > best[0]):
                        best = (gain, j)
                if best is None:
                    continue
                j = best[1]
                if j == len(levels):
                    levels.append([])
                    loads.append(np.zeros(n))
                    U.append(0.0)
                levels[i], U[i] = rest, ui
                loads[i][s[1]:s[2]] -= sz
                levels[j].append(s)
                loads[j][s[1]:s[2]] += sz
                U[j] = _union_len(P, levels[j])
                changed = True
        if not changed:
            break
    return [lv for lv in levels if lv]


def _trip_cost(P, order):
    cur, w = 0.0, 0.0
    for p, q, _ in order:
        w += abs(float(P[p]) - cur) + float(P[q] - P[p])
        cur = float(P[q])
    return w


def _order_trips(P, trips, max_ls=80):
    cands = [sorted(trips, key=lambda t: (t[0], t[1])), sorted(trips, key=lambda t: (t[0], -t[1]))]
    rem, cur, near = list(trips), 0, []
    while rem:
        t = min(rem, key=lambda t: (abs(float(P[t[0]] - P[cur])), t[0], t[1]))
        rem.remove(t)
        near.append(t)
        cur = t[1]
    cands.append(near)
    best = None
    for o in cands:
        c = _trip_cost(P, o)
        improved = len(o) <= max_ls
        while improved:
            improved = False
            for i in range(len(o)):
                for j in range(len(o)):
                    if i == j:
                        continue
                    o2 = o[:i] + o[i + 1:]
                    o2.insert(j, o[i])
                    c2 = _trip_cost(P, o2)
                    if c2 < c - 1e-12:
                        o, c, improved = o2, c2, True
                        break
                if improved:
                    break
        if best is None or c < best[0]:
            best = (c, o)
    return best[1]


def _trip_stops(order):
    stops = [Stop(0, (), ())]
    for p, q, items in order:
        for x in range(p, q + 1):
            pk = tuple(s[0] for s in items if s[1] == x)
            dl = tuple(s[0] for s in items if s[2] == x)
            if pk or dl:
                stops.append(Stop(x, pk, dl))
    return stops


def _add_zero_length(line, stops, zeros, capacity):
    """Serve a == b items in their own stop, at a point the vehicle stands on
    or drives past with room to spare; a detour at the end otherwise."""
    P = line.positions
    stops = list(stops)
    for key, a, _ in zeros:
        sz = line.size(key)
        load, at = 0, None
        for k, st in enumerate(stops):
            load += sum(line.size(u) for u in st.pickups) - sum(line.size(u) for u in st.deliveries)
            if load + sz > capacity:
                continue
            nxt = stops[k + 1].vertex if k + 1 < len(stops) else st.vertex
            lo, hi = sorted((float(P[st.vertex]), float(P[nxt])))
            if st.vertex == a or lo <= float(P[a]) <= hi:
                at = k
                break
        if at is None:
            stops.append(Stop(a, (key,), (key,)))
        else:
            stops.insert(at + 1, Stop(a, (key,), (key,)))
    return stops


def _stops_weight(P, stops):
    return sum(abs(float(P[b.vertex]) - float(P[a.vertex])) for a, b in zip(stops, stops[1:]))


_EVICT_KEYS = (
    lambda s, x, l: (s[2] - x, -l.size(s[0])),
    lambda s, x, l: (s[2] - s[1], -l.size(s[0])),
    lambda s, x, l: ((s[2] - x) * l.size(s[0]), 0),
)


def solve_line_darp(line: LineInstance, capacity, max_search=400):
    """Weighted dial-a-ride on a line from point 0.

    Tries a greedy sweep plus several level packings (each split into
    monotone trips and sequenced), keeps the lightest feasible route.
    Packings are polished by local search when there are at most
    ``max_search`` segments.  Returns (route over point indices, weight,
    certificate dict).
    """
    for s in line.segments:
        if line.size(s[0]) > capacity:
            raise SizeExceedsCapacity(f"request {s[0]} has size {line.size(s[0])} > {capacity}")
    P = line.positions
    segs = [s for s in line.segments if s[2] > s[1]]
    zeros = [s for s in line.segments if s[2] <= s[1]]
    cands = [_greedy_line_stops(line, segs, capacity)]
    if segs:
        packs = [_evict_levels(line, segs, capacity, k) for k in _EVICT_KEYS]
        packs.append(_first_fit_levels(line, segs, capacity))
        if len(segs) <= max_search:
            packs += [_improve_levels(line, capacity, lv) for lv in packs]
        for lv in packs:
            trips = [t for level in lv for t in _components(level)]
            cands.append(_trip_stops(_order_trips(P, trips)))
    best = None
    for stops in cands:
        stops = _add_zero_length(line, stops, zeros, capacity)
        w = _stops_weight(P, stops)
        if best is not None and w >= best[0] - 1e-12:
            continue
        route = Route(line.vehicle, tuple(stops))
        if not check_line_route(line, route, capacity):
            best = (w, route)
    weight, route = best
    lb = max(line.flow_lb(capacity), line.steiner_lb())
    cert = {"weight": weight, "flow_lb": line.flow_lb(capacity), "steiner_lb": line.steiner_lb(),
            "ok": bool(weight <= 3.0 * lb + REL_TOL * max(1.0, weight))}
    return route, weight, cert


def check_line_route(line: LineInstance, route: Route, capacity) -> list:
    """Weighted feasibility of a line route; returns a list of problems."""
    probs = []
    seg = {s[0]: s for s in line.segments}
    onboard = {}
    load = 0
    done = set()
    if not route.stops or route.stops[0].vertex != 0:
        probs.append("route does not start at point 0")
    for k, st in enumerate(route.stops):
        later = []
        for key in st.deliveries:
            if key in onboard:
                if seg[key][2] != st.vertex:
                    probs.append(f"{key} delivered at wrong point")
                load -= onboard.pop(key)
                done.add(key)
            else:
                later.append(key)
        for key in st.pickups:
            if key not in seg or key in done or key in onboard:
                probs.append(f"bad pickup {key}")
                continue
            if seg[key][1] != st.vertex:
                probs.append(f"{key} picked at wrong point")
            onboard[key] = line.size(key)
            load += line.size(key)
        if load > capacity:
            probs.append(f"load {load} > {capacity} at stop {k}")
        for key in later:
            if key in onboard and seg[key][2] == st.vertex:
                load -= onboard.pop(key)
                done.add(key)
            else:
                probs.append(f"{key} delivered before pickup")
    if onboard or done != set(seg):
        probs.append("not every request served")
    return probs


# --- assembly -------------------------------------------------------------

def _restrict(inst: Instance, idxs):
    return inst.replace(requests=tuple(inst.requests[i] for i in idxs))


def _remap(route: Route, idxs) -> Route:
    def m(ids):
        return tuple((idxs[u[0]], u[1]) for u in ids)
    return Route(route.vehicle, tuple(Stop(s.vertex, m(s.pickups), m(s.deliveries)) for s in route.stops))


def solve_normal_pipeline(inst: Instance, normal, alpha):
    """Rescale, solve the unit instance, unfold, assign and trim, solve lines, lift."""
    sc = rescale_normal_requests(inst, normal, alpha)
    unit_sol = solve_alg1(sc.unit_instance, mode="derandomized")
    W = {r.vehicle: r for r in unit_sol.routes}
    lines = [unfold_route_to_line(W[j], inst.metric) for j in range(inst.h)]
    route_w = [W[j].weight(inst.metric) for j in range(inst.h)]
    unfold_ok = all(np.float64(lines[j].length) == np.float64(route_w[j]) for j in range(inst.h))
    sizes = {k: s for k, s in enumerate(sc.sizes_tilde)}
    trimmed = assign_and_trim(lines, sizes)
    sum_w = sum(route_w)
    sum_flow = sum(t.flow_lb(sc.cap_tilde) for t in trimmed)
    routes = []
    violations = 0
    line_total = 0.0
    for t in trimmed:
        lr, lw, cert = solve_line_darp(t, sc.cap_tilde)
        violations += 0 if cert["ok"] else 1
        line_total += lw
        routes.append(_lift_line_route(inst, sc, t, lr))
    lifted_w = sum(r.weight(inst.metric) for r in routes)
    info = {
        "gamma": sc.gamma, "cap_hat": sc.cap_hat, "cap_tilde": sc.cap_tilde,
        "unfold_ok": bool(unfold_ok),
        "route_weight": sum_w, "trimmed_flow": sum_flow,
        "assign_ok": bool(sum_flow <= sum_w + REL_TOL * max(1.0, sum_w)),
        "line_weight": line_total, "line_violations": violations,
        "lifted_weight": lifted_w,
        "lift_ok": bool(lifted_w <= 3.0 * sum_w + REL_TOL * max(1.0, lifted_w)),
        "scaling_ok": bool(all(h <= 2 * inst.requests[i].count + 1e-9 for h, i in zip(sc.sizes_hat, sc.specs))
                           and sc.cap_hat >= inst.capacity * (1 - 1 / alpha) - 1e-9),
        "max_size_ok": bool(max(sc.sizes_hat, default=0) <= sc.cap_hat / 3 + 1e-9),
    }
    return routes, info


def _lift_line_route(inst, sc, line, lr):
    """Map line points back to route vertices; each scaled spec carries all its original copies."""
    stops = []
    for st in lr.stops:
        def expand(keys):
            out = []
            for k in keys:
                i = sc.specs[k]
                out.extend((i, c) for c in range(inst.requests[i].count))
            return tuple(out)
        stops.append(Stop(line.vertices[st.vertex], expand(st.pickups), expand(st.deliveries)))
    return Route(line.vehicle, tuple(stops))


def _concat(inst, phases):
    routes = []
    for j, o in enumerate(inst.vehicles):
        stops = [Stop(o)]
        for ph in phases:
            st = list(ph[j].stops)
            if st and st[0].vertex == o and not st[0].pickups and not st[0].deliveries:
                if stops[-1].vertex == o:
                    st = st[1:]
            stops.extend(st)
        routes.append(Route(j, tuple(stops)))
    return routes


def solve_improved(inst: Instance, alpha=None, beta=None) -> Solution:
    cls = classify_requests(inst, alpha, beta)
    lam = inst.capacity
    phases = []
    meta = {"alpha": cls.alpha, "beta": cls.beta,
            "small": len(cls.small), "normal": len(cls.normal), "big": len(cls.big)}
    ok = True
    if cls.small:
        sub = _restrict(inst, cls.small)
        s2 = solve_alg2(sub, return_home=True)
        by_v = {r.vehicle: _remap(r, cls.small) for r in s2.routes}
        phases.append([by_v[j] for j in range(inst.h)])
        meta["small_weight"] = s2.weight
    if cls.big:
        br, bound = serve_big_requests(inst, cls.big)
        bw = sum(r.weight(inst.metric) for r in br)
        meta["big_weight"] = bw
        meta["big_bound"] = bound
        ok &= bw <= bound + REL_TOL * max(1.0, bw)
        phases.append(br)
    if cls.normal:
        specs_t = None
        fallback = lam < 2 * cls.alpha or cls.alpha < 1
        if not fallback:
            sc = rescale_normal_requests(inst, cls.normal, cls.alpha)
            specs_t = sc.sizes_tilde
            fallback = max(specs_t) > sc.cap_tilde
        if fallback:
            sub = _restrict(inst, cls.normal)
            s1 = solve_alg1(sub, mode="derandomized")
            by_v = {r.vehicle: _remap(r, cls.normal) for r in s1.routes}
            phases.append([by_v[j] for j in range(inst.h)])
            meta["normal_mode"] = "fallback"
        else:
            nr, info = solve_normal_pipeline(inst, cls.normal, cls.alpha)
            phases.append(nr)
            meta["normal_mode"] = "pipeline"
            meta["pipeline"] = info
            ok &= info["unfold_ok"] and info["assign_ok"] and info["lift_ok"] and info["scaling_ok"]
            ok &= info["line_violations"] == 0
    routes = _concat(inst, phases)
    sol = Solution.from_routes(inst, routes, algorithm="improved")
    meta["certificate"] = {"ok": bool(ok)}
    sol.meta.update(meta)
    return sol
