"""Request graph, consistent source/destination tour sets and permutation merging."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import IndexSetMismatch, NotPerfectSquare
from .metric import Instance, MetricSpace, induced_submetric
from .tours import Tour, longest_monotone_subsequence, preorder_tours, prim_forest


class RequestGraph:
    """The composed metric over vehicle nodes (0..h-1) and unit request nodes (h..h+m-1).

    Node weights are d_SO + d_TO where SO lists the vehicle vertices followed
    by all sources and TO the vehicle vertices followed by all destinations.
    That gives 2 d(o, o') between vehicles, d(o, s) + d(o, t) between a vehicle
    and a request, and d(s, s') + d(t, t') between requests.
    """

    def __init__(self, inst: Instance):
        self.inst = inst
        self.units = inst.unit_requests()
        self.h = inst.h
        self.m = len(self.units)
        o = list(inst.vehicles)
        S = [inst.src(u) for u in self.units]
        T = [inst.dst(u) for u in self.units]
        self.so = induced_submetric(inst.metric, o + S)
        self.to = induced_submetric(inst.metric, o + T)
        self.size = self.h + self.m

    @property
    def depot_nodes(self):
        return list(range(self.h))

    @property
    def request_nodes(self):
        return list(range(self.h, self.size))

    def row(self, i) -> np.ndarray:
        return self.so.row(i) + self.to.row(i)

    def w(self, i, j) -> float:
        return self.so.d(i, j) + self.to.d(i, j)

    @property
    def table(self) -> np.ndarray:
        return self.so.table + self.to.table


def build_request_graph(inst: Instance) -> RequestGraph:
    return RequestGraph(inst)


@dataclass(frozen=True)
class TourPair:
    vehicle: int
    perm: tuple  # unit request ids in tour order
    source_tour: Tour
    dest_tour: Tour

    def __len__(self):
        return len(self.perm)


def consistent_tour_sets(inst: Instance, graph: RequestGraph | None = None) -> list:
    """2-approximate mTSP on the request graph, split into source and destination tours."""
    H = graph or RequestGraph(inst)
    parent, order = prim_forest(H.size, H.row, H.depot_nodes)
    pairs = []
    d = inst.metric
    for v, seq in enumerate(preorder_tours(parent, order, H.depot_nodes)):
        perm = tuple(H.units[i - H.h] for i in seq[1:])
        o = inst.vehicles[v]
        vs = (o,) + tuple(inst.src(u) for u in perm)
        vt = (o,) + tuple(inst.dst(u) for u in perm)
        pairs.append(TourPair(v, perm, Tour(vs, d.tour_weight(vs)), Tour(vt, d.tour_weight(vt))))
    return pairs


@dataclass(frozen=True)
class MergeResult:
    perm: tuple
    iterations: int
    weight: float  # l(T) = w_s(T) + w_t(T)
    base: float  # w_s(tsp_s) + w_t(tsp_t)

    @property
    def bound(self) -> float:
        r = len(self.perm)
        return 2.0 * math.sqrt(max(r - 1, 0)) * self.base


def merge_permutation(Ms: MetricSpace, Mt: MetricSpace, tsp_s: Tour, tsp_t: Tour) -> MergeResult:
    """Merge two tours over the same index set into one common order.

    Points are labelled by their position in ``tsp_s``; ``tsp_t`` is rotated
    so it starts at label 1.  A longest monotone subsequence of what is left
    of the destination order is peeled off and appended until nothing is left.
    """
    s_order = list(tsp_s.vertices)
    t_order = list(tsp_t.vertices)
    if sorted(s_order) != sorted(t_order) or len(set(s_order)) != len(s_order):
        raise IndexSetMismatch("tours must visit the same set of distinct indices")
    if len(s_order) != Ms.n or Ms.n != Mt.n:
        raise IndexSetMismatch("tours must cover every index of both metrics")
    r = len(s_order)
    base = Ms.tour_weight(s_order) + Mt.tour_weight(t_order)
    if r == 0:
        return MergeResult((), 0, 0.0, 0.0)
    label = {x: i + 1 for i, x in enumerate(s_order)}
    p = [label[x] for x in t_order]
    k = p.index(1)
    p = p[k:] + p[:k]
    out = [1]
    rest = p[1:]
    iters = 0
    while rest:
        sub, _ = longest_monotone_subsequence(rest)
        out.extend(sub)
        taken = set(sub)
        rest = [x for x in rest if x not in taken]
        iters += 1
    perm = tuple(s_order[q - 1] for q in out)
    return MergeResult(perm, iters, Ms.tour_weight(perm) + Mt.tour_weight(perm), base)


def tightness_instance(r: int):
    """Two cluster metrics on r = k*k points where pairing is maximally inconsistent.

    Point a = i*k + j sits in source cluster i and destination cluster j;
    distances are 1 across clusters and 0 inside one.
    """
    k = math.isqrt(r)
    if r < 1 or k * k != r:
        raise NotPerfectSquare(f"{r} is not a perfect square")
    a = np.arange(r)
    ci, cj = a // k, a % k
    ws = (ci[:, None] != ci[None, :]).astype(float)
    wt = (cj[:, None] != cj[None, :]).astype(float)
    return MetricSpace(dist=ws), MetricSpace(dist=wt)
