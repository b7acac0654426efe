"""Shared corpora and strategies for the test suite."""
import numpy as np
from hypothesis import strategies as st

from mdarp.generators import make_rng
from mdarp.metric import Instance, MetricSpace, RequestSpec, shortest_path_closure


def tiny_instance(seed, max_n=8, max_units=6, max_h=2, caps=(1, 2, 3)):
    """Small table-backed instance the exact oracle can handle."""
    rng = make_rng(seed)
    n = int(rng.integers(2, max_n + 1))
    if rng.random() < 0.6:
        D = MetricSpace(coords=rng.uniform(0, 10, size=(n, 2))).table
    else:
        W = rng.uniform(1, 10, size=(n, n))
        W[rng.random((n, n)) < 0.3] = np.inf
        W = np.minimum(W, W.T)
        for a in range(n - 1):
            W[a, a + 1] = W[a + 1, a] = min(W[a, a + 1], 5.0)
        D = shortest_path_closure(W)
    h = int(rng.integers(1, min(max_h, n) + 1))
    veh = tuple(int(v) for v in rng.choice(n, size=h, replace=False))
    m = int(rng.integers(0, max_units + 1))
    reqs, left = [], m
    while left:
        c = min(left, int(rng.integers(1, 3)))
        reqs.append(RequestSpec(int(rng.integers(n)), int(rng.integers(n)), c))
        left -= c
    cap = int(rng.choice(caps))
    return Instance(MetricSpace(dist=D), cap, veh, tuple(reqs))


def sweep_corpus(count=200, base=1000):
    return [tiny_instance(base + i) for i in range(count)]


def medium_instance(seed):
    rng = make_rng(seed)
    n = int(rng.integers(10, 120))
    h = int(rng.integers(1, 6))
    m = int(rng.integers(1, 201))
    pts = rng.uniform(0, 100, size=(n, 2))
    if rng.random() < 0.5:
        centers = rng.uniform(0, 100, size=(4, 2))
        pts = centers[rng.integers(4, size=n)] + rng.normal(0, 4, size=(n, 2))
    veh = tuple(int(v) for v in rng.choice(n, size=h, replace=False))
    reqs, left = [], m
    while left:
        c = min(left, int(rng.integers(1, 6)))
        reqs.append(RequestSpec(int(rng.integers(n)), int(rng.integers(n)), c))
        left -= c
    cap = int(rng.choice([1, 2, 3, 4, 8, 16]))
    return Instance(MetricSpace(coords=pts), cap, veh, tuple(reqs))


def medium_corpus(count=100, base=5000):
    return [medium_instance(base + i) for i in range(count)]


def random_space(rng, n, table=True):
    pts = rng.uniform(0, 10, size=(n, 2))
    sp = MetricSpace(coords=pts)
    return MetricSpace(dist=sp.table) if table else sp


@st.composite
def instances(draw, max_n=7, max_units=5, max_h=2):
    seed = draw(st.integers(0, 2**32 - 1))
    return tiny_instance(seed, max_n=max_n, max_units=max_units, max_h=max_h)


# criterion id -> list of (part, ok, detail); filled by test_acceptance
ACCEPTANCE = {}


def report(cid, part, ok, detail=""):
    ACCEPTANCE.setdefault(cid, []).append((part, bool(ok), detail))
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {cid} / {part}: {detail}")


def acceptance_lines():
    out = []
    for cid in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[cid]
        ok = all(p[1] for p in parts)
        desc = "; ".join(f"{p[0]}={'ok' if p[1] else 'FAIL'} ({p[2]})" for p in parts)
        out.append(f"{'PASS' if ok else 'FAIL'}  criterion {cid}: {desc}")
    return out
