"""Seeded instance generators."""
from __future__ import annotations

import numpy as np

from .consistent import tightness_instance
from .errors import BadParams
from .metric import Instance, MetricSpace, RequestSpec, shortest_path_closure

KINDS = ("euclidean", "clustered", "line", "tightness", "random")


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def _requests(rng, n, m, max_count=1):
    reqs = []
    left = m
    while left > 0:
        c = int(rng.integers(1, max_count + 1)) if max_count > 1 else 1
        c = min(c, left)
        s = int(rng.integers(n))
        t = int(rng.integers(n - 1)) if n > 1 else 0
        if n > 1 and t >= s:
            t += 1
        reqs.append(RequestSpec(s, t, c))
        left -= c
    return tuple(reqs)


def _vehicles(rng, n, h):
    return tuple(int(v) for v in rng.choice(n, size=h, replace=False))


def generate_instance(kind: str, n=10, m=5, h=1, capacity=1, seed=0, **params) -> Instance:
    """Build a reproducible instance.

    Extra params: ``max_count`` (multiplicity per spec), ``clusters``,
    ``spread``, ``edge_prob`` and ``r`` (tightness side size).
    """
    if kind not in KINDS:
        raise BadParams(f"unknown kind {kind!r}; expected one of {KINDS}")
    if capacity < 1 or m < 0 or h < 1:
        raise BadParams("need capacity >= 1, m >= 0, vehicles >= 1")
    rng = make_rng(seed)
    max_count = int(params.get("max_count", 1))
    if kind == "tightness":
        return tightness_mdarp(int(params.get("r", 4)), capacity)
    if n < 1 or h > n:
        raise BadParams("need n >= 1 and vehicles <= n")
    if kind == "euclidean":
        space = MetricSpace(coords=rng.uniform(0.0, 100.0, size=(n, 2)))
    elif kind == "line":
        space = MetricSpace(coords=np.column_stack([np.sort(rng.uniform(0.0, 100.0, size=n)), np.zeros(n)]))
    elif kind == "clustered":
        k = int(params.get("clusters", max(2, h)))
        spread = float(params.get("spread", 3.0))
        centers = rng.uniform(0.0, 100.0, size=(k, 2))
        lab = rng.integers(k, size=n)
        space = MetricSpace(coords=centers[lab] + rng.normal(0.0, spread, size=(n, 2)))
    else:
        p = float(params.get("edge_prob", 0.5))
        w = np.full((n, n), np.inf)
        mask = np.triu(rng.random((n, n)) < p, 1)
        vals = rng.uniform(1.0, 10.0, size=(n, n))
        w[mask] = vals[mask]
        perm = rng.permutation(n)
        for a, b in zip(perm, perm[1:]):
            w[min(a, b), max(a, b)] = min(w[min(a, b), max(a, b)], vals[b, a])
        w = np.minimum(w, w.T)
        space = MetricSpace(dist=shortest_path_closure(w))
    return Instance(space, capacity, _vehicles(rng, n, h), _requests(rng, n, m, max_count))


def tightness_mdarp(r: int, capacity=1) -> Instance:
    """Depot 0, sources 1..r and destinations r+1..2r laid out as the cluster pair.

    Sources and destinations are one apart from each other and from the depot,
    so source-side and destination-side distances are exactly the two cluster metrics.
    """
    Ms, Mt = tightness_instance(r)
    N = 2 * r + 1
    D = np.ones((N, N))
    D[1:r + 1, 1:r + 1] = Ms.table
    D[r + 1:, r + 1:] = Mt.table
    np.fill_diagonal(D, 0.0)
    reqs = tuple(RequestSpec(1 + a, r + 1 + a) for a in range(r))
    return Instance(MetricSpace(dist=D), capacity, (0,), reqs)
