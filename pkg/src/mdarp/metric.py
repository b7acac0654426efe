"""Metric spaces, problem instances, validation and instance JSON I/O."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidVertexId, MetricViolation, SchemaError

TRI_EPS = 1e-9


def _euclid_row(xs, ys, x, y):
    dx = xs - x
    dy = ys - y
    return np.sqrt(dx * dx + dy * dy)


class MetricSpace:
    """A finite metric given by an explicit table, by 2-D points, or both.

    When both are present the table is authoritative.  Coordinate-backed
    spaces never build the full table unless ``table`` is requested, so
    rows are computed on demand in O(n) memory.
    """

    __slots__ = ("n", "coords", "_dist", "_dist_rows", "_xs", "_ys", "_xl", "_yl", "_cache")

    def __init__(self, dist=None, coords=None):
        if dist is None and coords is None:
            raise ValueError("need a distance table or coordinates")
        self._dist = None
        self._dist_rows = None
        self.coords = None
        if coords is not None:
            c = np.array(coords, dtype=np.float64)
            if c.ndim != 2 or c.shape[1] != 2:
                raise DimensionMismatch(f"coords must be a k x 2 array, got shape {c.shape}")
            c.setflags(write=False)
            self.coords = c
            self._xs = np.ascontiguousarray(c[:, 0])
            self._ys = np.ascontiguousarray(c[:, 1])
            self._xl = self._xs.tolist()
            self._yl = self._ys.tolist()
        if dist is not None:
            d = np.array(dist, dtype=np.float64)
            if d.ndim != 2 or d.shape[0] != d.shape[1]:
                raise DimensionMismatch(f"distance table must be n x n, got shape {d.shape}")
            if self.coords is not None and len(self.coords) != d.shape[0]:
                raise DimensionMismatch("coords and distance table disagree on n")
            d.setflags(write=False)
            self._dist = d
            self._dist_rows = d.tolist()
        self.n = int(self._dist.shape[0] if self._dist is not None else self.coords.shape[0])
        self._cache = None

    @property
    def has_table(self):
        return self._dist is not None

    def d(self, u, v) -> float:
        if self._dist_rows is not None:
            return self._dist_rows[u][v]
        dx = self._xl[u] - self._xl[v]
        dy = self._yl[u] - self._yl[v]
        return math.sqrt(dx * dx + dy * dy)

    def row(self, u) -> np.ndarray:
        if self._dist is not None:
            return self._dist[u]
        return _euclid_row(self._xs, self._ys, self._xl[u], self._yl[u])

    def dists_from(self, u, targets) -> np.ndarray:
        targets = np.asarray(targets, dtype=np.intp)
        if self._dist is not None:
            return self._dist[u, targets]
        return _euclid_row(self._xs[targets], self._ys[targets], self._xl[u], self._yl[u])

    def rows(self, us) -> np.ndarray:
        """Distance rows for several vertices at once, shape (len(us), n)."""
        us = np.asarray(us, dtype=np.intp)
        if self._dist is not None:
            return self._dist[us]
        dx = self._xs[None, :] - self._xs[us][:, None]
        dy = self._ys[None, :] - self._ys[us][:, None]
        return np.sqrt(dx * dx + dy * dy)

    @property
    def table(self) -> np.ndarray:
        """The full n x n table (materialized and cached for coordinate spaces)."""
        if self._dist is not None:
            return self._dist
        if self._cache is None:
            dx = self._xs[:, None] - self._xs[None, :]
            dy = self._ys[:, None] - self._ys[None, :]
            t = np.sqrt(dx * dx + dy * dy)
            t.setflags(write=False)
            self._cache = t
        return self._cache

    def sub(self, subset) -> "MetricSpace":
        return induced_submetric(self, subset)

    def walk_weight(self, seq: Sequence[int]) -> float:
        total = 0.0
        for a, b in zip(seq, seq[1:]):
            total += self.d(a, b)
        return total

    def tour_weight(self, seq: Sequence[int]) -> float:
        if len(seq) < 2:
            return 0.0
        return self.walk_weight(seq) + self.d(seq[-1], seq[0])

    def __repr__(self):
        kind = "table" if self.has_table else "coords"
        return f"MetricSpace(n={self.n}, {kind})"


@dataclass(frozen=True)
class Violation:
    kind: str  # Diagonal | Negative | Symmetry | Triangle
    where: tuple
    magnitude: float

    def __str__(self):
        return f"{self.kind} at {self.where} (breach {self.magnitude:g})"


def validate_metric(space) -> list[Violation]:
    """Check the metric axioms; returns every breach found.

    Coordinate-only spaces are Euclidean and pass by construction.  ``space``
    may also be a raw square table.
    """
    if isinstance(space, MetricSpace):
        if not space.has_table:
            return []
        d = space.table
    else:
        d = np.asarray(space, dtype=np.float64)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise DimensionMismatch(f"distance table must be n x n, got shape {d.shape}")
    n = d.shape[0]
    out: list[Violation] = []
    for u in np.flatnonzero(np.diag(d) != 0):
        out.append(Violation("Diagonal", (int(u),), float(abs(d[u, u]))))
    neg = np.argwhere(d < 0)
    for u, v in neg:
        out.append(Violation("Negative", (int(u), int(v)), float(-d[u, v])))
    asym = np.argwhere(np.triu(d != d.T, 1))
    for u, v in asym:
        out.append(Violation("Symmetry", (int(u), int(v)), float(abs(d[u, v] - d[v, u]))))
    # triangle: d[u,w] <= d[u,v] + d[v,w] + eps, reported for u < w
    upper = np.triu(np.ones((n, n), dtype=bool), 1)
    tol = TRI_EPS * np.maximum(1.0, d)
    for v in range(n):
        via = d[:, v][:, None] + d[v, :][None, :]
        breach = d - via
        bad = (breach > tol) & upper
        if bad.any():
            for u, w in np.argwhere(bad):
                if u == v or w == v:
                    continue
                out.append(Violation("Triangle", (int(u), v, int(w)), float(breach[u, w])))
    return out


def shortest_path_closure(table) -> np.ndarray:
    """All-pairs shortest paths (Floyd-Warshall); inf entries mean no edge."""
    d = np.array(table, dtype=np.float64)
    n = d.shape[0]
    np.fill_diagonal(d, 0.0)
    for k in range(n):
        np.minimum(d, d[:, k][:, None] + d[k, :][None, :], out=d)
    return np.minimum(d, d.T)


def induced_submetric(space: MetricSpace, subset) -> MetricSpace:
    """Restrict ``space`` to ``subset``; repeated ids become zero-distance copies."""
    idx = np.asarray(list(subset), dtype=np.intp)
    if idx.size and (idx.min() < 0 or idx.max() >= space.n):
        bad = [int(i) for i in idx if i < 0 or i >= space.n]
        raise InvalidVertexId(f"vertex ids out of range [0, {space.n}): {bad[:5]}")
    coords = space.coords[idx] if space.coords is not None else None
    dist = space.table[np.ix_(idx, idx)] if space.has_table else None
    return MetricSpace(dist=dist, coords=coords)


@dataclass(frozen=True)
class RequestSpec:
    src: int
    dst: int
    count: int = 1


@dataclass(frozen=True)
class Instance:
    metric: MetricSpace
    capacity: int
    vehicles: tuple
    requests: tuple
    _units: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "vehicles", tuple(int(v) for v in self.vehicles))
        object.__setattr__(
            self,
            "requests",
            tuple(r if isinstance(r, RequestSpec) else RequestSpec(*r) for r in self.requests),
        )
        if int(self.capacity) < 1:
            raise ValueError("capacity must be a positive integer")
        if not self.vehicles:
            raise ValueError("at least one vehicle is required")
        n = self.metric.n
        for v in self.vehicles:
            if not 0 <= v < n:
                raise InvalidVertexId(f"vehicle vertex {v} out of range")
        for r in self.requests:
            if not (0 <= r.src < n and 0 <= r.dst < n):
                raise InvalidVertexId(f"request {r} has an endpoint out of range")
            if r.count < 1:
                raise ValueError(f"request {r} has non-positive count")
        units = tuple((i, c) for i, r in enumerate(self.requests) for c in range(r.count))
        object.__setattr__(self, "_units", units)

    @property
    def n(self):
        return self.metric.n

    @property
    def h(self):
        return len(self.vehicles)

    @property
    def m(self):
        return len(self._units)

    def unit_requests(self) -> tuple:
        """Unit request instances as (spec index, copy index) pairs."""
        return self._units

    def src(self, rid):
        return self.requests[rid[0]].src

    def dst(self, rid):
        return self.requests[rid[0]].dst

    def replace(self, **kw) -> "Instance":
        args = dict(metric=self.metric, capacity=self.capacity, vehicles=self.vehicles,
                    requests=self.requests)
        args.update(kw)
        return Instance(**args)


def normalize_vehicles(inst: Instance):
    """Collapse co-located vehicles.

    Returns the normalized instance and a mapping from every original
    vehicle index to the vertex of the vehicle that represents it.
    """
    seen = {}
    kept = []
    mapping = {}
    for j, v in enumerate(inst.vehicles):
        if v not in seen:
            seen[v] = len(kept)
            kept.append(v)
        mapping[j] = v
    if len(kept) == len(inst.vehicles):
        return inst, mapping
    return inst.replace(vehicles=tuple(kept)), mapping


# --- JSON -----------------------------------------------------------------

def _req(doc, key, kind, path=None):
    path = path or key
    if key not in doc:
        raise SchemaError(path, "missing")
    val = doc[key]
    if kind is int and (isinstance(val, bool) or not isinstance(val, int)):
        raise SchemaError(path, "expected an integer")
    if kind is list and not isinstance(val, list):
        raise SchemaError(path, "expected a list")
    return val


def _num(x, path):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise SchemaError(path, "expected a number")
    return float(x)


def instance_from_dict(doc: dict, validate=True) -> Instance:
    if not isinstance(doc, dict):
        raise SchemaError("$", "expected an object")
    version = doc.get("version", 1)
    if version != 1:
        raise SchemaError("version", f"unsupported version {version!r}")
    capacity = _req(doc, "capacity", int)
    if capacity < 1:
        raise SchemaError("capacity", "must be positive")
    vertices = _req(doc, "vertices", list)
    n = len(vertices)
    coords = []
    for i, vx in enumerate(vertices):
        if not isinstance(vx, dict):
            raise SchemaError(f"vertices[{i}]", "expected an object")
        vid = _req(vx, "id", int, f"vertices[{i}].id")
        if vid != i:
            raise SchemaError(f"vertices[{i}].id", "ids must be 0..n-1 in order")
        if "coords" in vx:
            c = vx["coords"]
            if not isinstance(c, list) or len(c) != 2:
                raise SchemaError(f"vertices[{i}].coords", "expected [x, y]")
            coords.append([_num(c[0], f"vertices[{i}].coords[0]"), _num(c[1], f"vertices[{i}].coords[1]")])
    if coords and len(coords) != n:
        raise SchemaError("vertices", "coords must be given for every vertex or none")
    dist = None
    if "distances" in doc and doc["distances"] is not None:
        rows = _req(doc, "distances", list)
        if len(rows) != n:
            raise SchemaError("distances", f"expected {n} rows")
        dist = []
        for i, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != n:
                raise SchemaError(f"distances[{i}]", f"expected {n} entries")
            dist.append([_num(x, f"distances[{i}][{j}]") for j, x in enumerate(row)])
    if dist is None and not coords:
        raise SchemaError("distances", "need distances or vertex coords")
    if n == 0:
        raise SchemaError("vertices", "empty vertex list")
    space = MetricSpace(dist=dist, coords=coords or None)
    if validate and dist is not None:
        bad = validate_metric(space)
        if bad:
            raise MetricViolation(bad)
    vehicles = _req(doc, "vehicles", list)
    for i, v in enumerate(vehicles):
        if isinstance(v, bool) or not isinstance(v, int) or not 0 <= v < n:
            raise SchemaError(f"vehicles[{i}]", "expected a vertex id")
    if not vehicles:
        raise SchemaError("vehicles", "at least one vehicle required")
    reqs = []
    for i, r in enumerate(_req(doc, "requests", list)):
        if not isinstance(r, dict):
            raise SchemaError(f"requests[{i}]", "expected an object")
        s = _req(r, "src", int, f"requests[{i}].src")
        t = _req(r, "dst", int, f"requests[{i}].dst")
        c = r.get("count", 1)
        if isinstance(c, bool) or not isinstance(c, int) or c < 1:
            raise SchemaError(f"requests[{i}].count", "expected a positive integer")
        for key, val in (("src", s), ("dst", t)):
            if not 0 <= val < n:
                raise SchemaError(f"requests[{i}].{key}", "vertex id out of range")
        reqs.append(RequestSpec(s, t, c))
    return Instance(space, capacity, tuple(vehicles), tuple(reqs))


def instance_to_dict(inst: Instance) -> dict:
    sp = inst.metric
    verts = []
    for i in range(sp.n):
        v = {"id": i}
        if sp.coords is not None:
            v["coords"] = [float(sp.coords[i, 0]), float(sp.coords[i, 1])]
        verts.append(v)
    doc = {"version": 1, "capacity": int(inst.capacity), "vertices": verts}
    if sp.has_table:
        doc["distances"] = sp.table.tolist()
    doc["vehicles"] = list(inst.vehicles)
    doc["requests"] = [{"src": r.src, "dst": r.dst, "count": r.count} for r in inst.requests]
    return doc


def load_instance(data) -> Instance:
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"invalid JSON: {exc}") from exc
    return instance_from_dict(doc)


def save_instance(inst: Instance) -> bytes:
    return (json.dumps(instance_to_dict(inst), separators=(",", ":")) + "\n").encode("utf-8")


def line_metric(points: Iterable[float]) -> MetricSpace:
    """Points on the x axis, coordinate-backed."""
    return MetricSpace(coords=[[float(p), 0.0] for p in points])
