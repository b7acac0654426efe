import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mdarp.errors import BadParams, Disconnected, EmptyDepotSet, NotEulerian
from mdarp.generators import make_rng
from mdarp.metric import MetricSpace, line_metric
from mdarp.oracle import exact_mtsp, exact_steiner_forest, exact_tsp
from mdarp.tours import (
    UnionFind, approx_mtsp, approx_tsp_tour, eulerian_shortcut_walk, longest_monotone_subsequence,
    steiner_forest,
)

from helpers import random_space


def test_tsp_single_vertex():
    t = approx_tsp_tour(line_metric(range(3)), [1], 1)
    assert t.vertices == (1,) and t.weight == 0.0


def test_tsp_line():
    t = approx_tsp_tour(line_metric(range(3)), [0, 1, 2], 0)
    assert t.vertices == (0, 1, 2) and t.weight == 4.0


def test_mtsp_examples():
    L = line_metric(range(3))
    assert [t.vertices for t in approx_mtsp(L, [0, 1, 2], [0])] == [(0, 1, 2)]
    tours = approx_mtsp(line_metric([0, 1, 10, 11]), [0, 1, 2, 3], [0, 2])
    assert [(t.vertices, t.weight) for t in tours] == [((0, 1), 2.0), ((2, 3), 2.0)]
    assert sum(t.weight for t in approx_mtsp(L, [0, 1, 2], [0, 1, 2])) == 0.0
    with pytest.raises(EmptyDepotSet):
        approx_mtsp(L, [0, 1], [])
    with pytest.raises(BadParams):
        approx_mtsp(L, [0, 1], [0, 0])


def test_mtsp_covers_everything_once():
    rng = make_rng(4)
    sp = random_space(rng, 40, table=False)
    tours = approx_mtsp(sp, range(40), [3, 17, 29])
    seen = [v for t in tours for v in t.vertices]
    assert sorted(seen) == list(range(40))
    assert [t.vertices[0] for t in tours] == [3, 17, 29]
    for t in tours:
        assert t.weight == pytest.approx(sp.tour_weight(t.vertices))


def test_steiner_examples():
    L = line_metric(range(4))
    f = steiner_forest(L, [(0, 2), (1, 3)])
    assert f.weight == pytest.approx(3.0)
    f1 = steiner_forest(L, [(0, 3)])
    assert len(f1.edges) == 1 and f1.weight == 3.0
    assert steiner_forest(L, [(2, 2)]).weight == 0.0


def _connected(edges, u, v):
    uf = UnionFind()
    for a, b, _ in edges:
        uf.union(a, b)
    return uf.find(u) == uf.find(v)


def test_steiner_forest_connects_pairs_at_scale():
    rng = make_rng(9)
    sp = random_space(rng, 400, table=False)
    pairs = [tuple(int(x) for x in rng.choice(400, 2, replace=False)) for _ in range(60)]
    f = steiner_forest(sp, pairs)
    assert all(_connected(f.edges, u, v) for u, v in pairs)
    uf = UnionFind()
    for a, b, _ in f.edges:
        assert uf.find(a) != uf.find(b)  # acyclic
        uf.union(a, b)


@pytest.mark.parametrize("seq,want,direction", [
    ([5, 4, 3, 2, 1], [5, 4, 3, 2, 1], "decreasing"),
    ([3, 1, 4, 2, 5], [1, 2, 5], "increasing"),
    ([3, 2, 4], [2, 4], "increasing"),
])
def test_monotone_examples(seq, want, direction):
    assert longest_monotone_subsequence(seq) == (want, direction)


def test_monotone_empty():
    sub, _ = longest_monotone_subsequence([])
    assert sub == []


def test_euler_examples():
    assert eulerian_shortcut_walk([(0, 1), (0, 1)], 0) == [0, 1]
    assert eulerian_shortcut_walk([(0, 1), (1, 0), (1, 2), (2, 1)], 0) == [0, 1, 2]
    w = eulerian_shortcut_walk([(0, 1), (1, 2), (2, 0)], 0)
    assert w[0] == 0 and sorted(w) == [0, 1, 2]
    assert eulerian_shortcut_walk([], 4) == [4]
    with pytest.raises(NotEulerian):
        eulerian_shortcut_walk([(0, 1)], 0)
    with pytest.raises(Disconnected):
        eulerian_shortcut_walk([(0, 1), (0, 1), (2, 3), (2, 3)], 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 9))
def test_tsp_within_two(seed, k):
    sp = random_space(make_rng(seed), k)
    t = approx_tsp_tour(sp, range(k), 0)
    assert sorted(t.vertices) == list(range(k))
    assert t.weight <= 2 * exact_tsp(sp, range(k)).value + 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(3, 7))
def test_steiner_within_two(seed, n):
    rng = make_rng(seed)
    sp = random_space(rng, n)
    pairs = [tuple(int(x) for x in rng.choice(n, 2, replace=False)) for _ in range(int(rng.integers(1, 4)))]
    f = steiner_forest(sp, pairs)
    assert all(_connected(f.edges, u, v) for u, v in pairs)
    assert f.weight <= 2 * exact_steiner_forest(sp, pairs).value + 1e-9


@settings(max_examples=200, deadline=None)
@given(st.permutations(list(range(9))))
def test_monotone_is_valid_and_long(perm):
    sub, direction = longest_monotone_subsequence(perm)
    it = iter(perm)
    assert all(x in it for x in sub)  # subsequence
    pairs = list(zip(sub, sub[1:]))
    assert all((a < b) if direction == "increasing" else (a > b) for a, b in pairs)
    assert len(sub) >= math.isqrt(len(perm) - 1) + 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_euler_doubled_tree_bound(seed):
    rng = make_rng(seed)
    n = int(rng.integers(2, 12))
    sp = random_space(rng, n)
    edges = []
    for v in range(1, n):
        u = int(rng.integers(v))
        edges += [(u, v), (v, u)]
    w = eulerian_shortcut_walk(edges, 0)
    assert w[0] == 0 and sorted(w) == list(range(n))
    assert sp.tour_weight(w) <= sum(sp.d(a, b) for a, b in edges) + 1e-9
