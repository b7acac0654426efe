"""Routes, solutions, the non-preemptive feasibility verifier and lower bounds."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import SchemaError, ZeroLowerBound
from .metric import Instance

REL_TOL = 1e-6


@dataclass(frozen=True)
class Stop:
    vertex: int
    pickups: tuple = ()
    deliveries: tuple = ()


@dataclass(frozen=True)
class Route:
    vehicle: int
    stops: tuple

    def vertices(self):
        return [s.vertex for s in self.stops]

    def weight(self, metric) -> float:
        return metric.walk_weight(self.vertices())


@dataclass
class Solution:
    routes: list
    weight: float
    algorithm: str = ""
    seed: int | None = None
    lower_bounds: "LowerBoundReport | None" = None
    runtime_ms: float = 0.0
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_routes(cls, inst: Instance, routes, algorithm="", **kw) -> "Solution":
        routes = sorted(routes, key=lambda r: r.vehicle)
        w = sum(r.weight(inst.metric) for r in routes)
        return cls(routes=routes, weight=w, algorithm=algorithm, **kw)


@dataclass(frozen=True)
class LowerBoundReport:
    flow_lb: float
    steiner_forest_lb: float
    mtsp_lb: float

    @property
    def best(self) -> float:
        return max(self.flow_lb, self.steiner_forest_lb, self.mtsp_lb)


@dataclass(frozen=True)
class Breach:
    kind: str
    route: int | None
    stop: int | None
    detail: str = ""


@dataclass
class FeasibilityReport:
    breaches: list

    @property
    def ok(self) -> bool:
        return not self.breaches

    def kinds(self):
        return [b.kind for b in self.breaches]


def trivial_route(inst: Instance, vehicle: int) -> Route:
    return Route(vehicle, (Stop(inst.vehicles[vehicle]),))


def verify_solution(inst: Instance, sol: Solution) -> FeasibilityReport:
    """Check every route and solution invariant; breaches are returned, never raised.

    Within one stop, deliveries of items already on board happen first, then
    pickups, then deliveries of items picked up at that same stop.
    """
    out = []
    units = set(inst.unit_requests())
    lam = inst.capacity
    seen_vehicle = {}
    picked_anywhere = {}
    delivered = set()
    for ri, route in enumerate(sol.routes):
        v = route.vehicle
        if not 0 <= v < inst.h:
            out.append(Breach("UnknownVehicle", ri, None, f"vehicle {v}"))
            continue
        if v in seen_vehicle:
            out.append(Breach("DuplicateRoute", ri, None, f"vehicle {v} already has route {seen_vehicle[v]}"))
            continue
        seen_vehicle[v] = ri
        if not route.stops or route.stops[0].vertex != inst.vehicles[v]:
            got = route.stops[0].vertex if route.stops else None
            out.append(Breach("WrongStartVertex", ri, 0, f"expected {inst.vehicles[v]}, got {got}"))
        onboard = set()
        load = 0
        for si, stop in enumerate(route.stops):
            later = []
            for rid in stop.deliveries:
                rid = tuple(rid)
                if rid in onboard:
                    onboard.discard(rid)
                    load -= 1
                    delivered.add(rid)
                    if inst.dst(rid) != stop.vertex:
                        out.append(Breach("WrongLocation", ri, si, f"{rid} delivered at {stop.vertex}"))
                elif rid in delivered:
                    out.append(Breach("DoubleService", ri, si, f"{rid} delivered twice"))
                else:
                    later.append(rid)
            here = set()
            for rid in stop.pickups:
                rid = tuple(rid)
                if rid not in units:
                    out.append(Breach("UnknownRequest", ri, si, f"{rid}"))
                    continue
                if rid in picked_anywhere:
                    out.append(Breach("DoubleService", ri, si, f"{rid} picked up twice"))
                    continue
                picked_anywhere[rid] = (ri, si)
                if inst.src(rid) != stop.vertex:
                    out.append(Breach("WrongLocation", ri, si, f"{rid} picked up at {stop.vertex}"))
                onboard.add(rid)
                here.add(rid)
                load += 1
            if load > lam:
                out.append(Breach("CapacityExceeded", ri, si, f"load {load} > {lam}"))
            for rid in later:
                if rid in here:
                    onboard.discard(rid)
                    load -= 1
                    delivered.add(rid)
                    if inst.dst(rid) != stop.vertex:
                        out.append(Breach("WrongLocation", ri, si, f"{rid} delivered at {stop.vertex}"))
                else:
                    out.append(Breach("DeliverBeforePickup", ri, si, f"{rid}"))
        for rid in sorted(onboard):
            out.append(Breach("UnservedRequest", ri, None, f"{rid} picked up but never delivered"))
    for v in range(inst.h):
        if v not in seen_vehicle:
            out.append(Breach("MissingRoute", None, None, f"vehicle {v}"))
    for rid in sorted(units - delivered):
        if rid not in picked_anywhere:
            out.append(Breach("UnservedRequest", None, None, f"{rid} never picked up"))
    w = sum(r.weight(inst.metric) for r in sol.routes)
    if abs(w - sol.weight) > REL_TOL * max(1.0, abs(w)):
        out.append(Breach("WeightMismatch", None, None, f"stored {sol.weight!r}, recomputed {w!r}"))
    return FeasibilityReport(out)


def flow_lower_bound(inst: Instance) -> float:
    d = inst.metric.d
    return sum(r.count * d(r.src, r.dst) for r in inst.requests) / inst.capacity


def steiner_lower_bounds(inst: Instance):
    """Half the weights of the 2-approximate Steiner forest and depot mTSP."""
    from .tours import approx_mtsp, steiner_forest

    pairs = [(r.src, r.dst) for r in inst.requests]
    forest = steiner_forest(inst.metric, pairs)
    depots = sorted(set(inst.vehicles))
    subset = sorted(set(depots) | {r.src for r in inst.requests})
    tours = approx_mtsp(inst.metric, subset, depots)
    return forest.weight / 2.0, sum(t.weight for t in tours) / 2.0


def lower_bounds(inst: Instance) -> LowerBoundReport:
    f, t = steiner_lower_bounds(inst)
    return LowerBoundReport(flow_lower_bound(inst), f, t)


def empirical_ratio(sol: Solution, lbs: LowerBoundReport) -> float:
    best = lbs.best
    if best == 0:
        if sol.weight == 0:
            return 1.0
        raise ZeroLowerBound(f"weight {sol.weight} against a zero lower bound")
    return sol.weight / best


def lift_solution(sol: Solution, orig: Instance, mapping: dict) -> Solution:
    """Map a solution of the normalized instance back to the original vehicles."""
    by_vertex = {}
    norm_vertices = []
    for j in sorted(mapping):
        if mapping[j] not in norm_vertices:
            norm_vertices.append(mapping[j])
    for r in sol.routes:
        by_vertex[norm_vertices[r.vehicle]] = r
    routes = []
    used = set()
    for j, v in enumerate(orig.vehicles):
        if v in used:
            routes.append(trivial_route(orig, j))
        else:
            used.add(v)
            routes.append(Route(j, by_vertex[v].stops))
    return Solution(routes=routes, weight=sol.weight, algorithm=sol.algorithm, seed=sol.seed,
                    lower_bounds=sol.lower_bounds, runtime_ms=sol.runtime_ms, meta=sol.meta)


# --- JSON -----------------------------------------------------------------

def solution_to_dict(sol: Solution) -> dict:
    doc = {"algorithm": sol.algorithm}
    if sol.seed is not None:
        doc["seed"] = int(sol.seed)
    doc["weight"] = float(sol.weight)
    doc["routes"] = [
        {
            "vehicle": r.vehicle,
            "stops": [
                {
                    "vertex": s.vertex,
                    "pickup": [list(x) for x in s.pickups],
                    "deliver": [list(x) for x in s.deliveries],
                }
                for s in r.stops
            ],
        }
        for r in sol.routes
    ]
    if sol.lower_bounds is not None:
        lb = sol.lower_bounds
        doc["lower_bounds"] = {"flow": lb.flow_lb, "steiner_forest": lb.steiner_forest_lb,
                               "mtsp": lb.mtsp_lb, "best": lb.best}
    doc["runtime_ms"] = float(sol.runtime_ms)
    if sol.meta:
        doc["meta"] = sol.meta
    return doc


def save_solution(sol: Solution) -> bytes:
    return (json.dumps(solution_to_dict(sol), separators=(",", ":")) + "\n").encode("utf-8")


def load_solution(data) -> Solution:
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("$", "expected an object")
    for key in ("weight", "routes"):
        if key not in doc:
            raise SchemaError(key, "missing")
    routes = []
    for i, r in enumerate(doc["routes"]):
        if "vehicle" not in r or "stops" not in r:
            raise SchemaError(f"routes[{i}]", "needs vehicle and stops")
        stops = []
        for j, s in enumerate(r["stops"]):
            if "vertex" not in s:
                raise SchemaError(f"routes[{i}].stops[{j}].vertex", "missing")
            stops.append(Stop(int(s["vertex"]),
                              tuple(tuple(x) for x in s.get("pickup", [])),
                              tuple(tuple(x) for x in s.get("deliver", []))))
        routes.append(Route(int(r["vehicle"]), tuple(stops)))
    lb = None
    if doc.get("lower_bounds"):
        d = doc["lower_bounds"]
        lb = LowerBoundReport(d["flow"], d["steiner_forest"], d["mtsp"])
    return Solution(routes=routes, weight=float(doc["weight"]), algorithm=doc.get("algorithm", ""),
                    seed=doc.get("seed"), lower_bounds=lb, runtime_ms=float(doc.get("runtime_ms", 0.0)),
                    meta=doc.get("meta", {}))
