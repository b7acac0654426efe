import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mdarp.alg1 import (
    alg1_certificate, assemble_route, n_fragments, partition_fragments, solve_alg1, theta_weights,
)
from mdarp.consistent import consistent_tour_sets
from mdarp.errors import ThetaOutOfRange
from mdarp.metric import Instance, line_metric
from mdarp.oracle import exact_mdarp
from mdarp.routing import verify_solution

from helpers import instances


def _chain(i, lam):
    reqs = tuple((2 * k + 1, 2 * k + 2) for k in range(i))
    inst = Instance(line_metric(range(2 * i + 1)), lam, (0,), reqs)
    (pair,) = consistent_tour_sets(inst)
    return inst, pair


@pytest.mark.parametrize("i,lam,theta,sizes", [
    (7, 3, 2, [2, 3, 2]),
    (7, 3, 3, [3, 3, 1]),
    (4, 3, 1, [1, 3]),
])
def test_fragment_sizes(i, lam, theta, sizes):
    _, pair = _chain(i, lam)
    plan = partition_fragments(pair, lam, theta)
    assert [len(f) for f in plan.fragments_s] == sizes
    assert plan.n_frags == n_fragments(i, lam, theta)
    assert sum(plan.fragments_s, ()) == pair.perm
    assert plan.fragments_t == plan.fragments_s


def test_theta_range():
    _, pair = _chain(4, 3)
    with pytest.raises(ThetaOutOfRange):
        partition_fragments(pair, 3, 0)
    with pytest.raises(ThetaOutOfRange):
        partition_fragments(pair, 3, 4)


def _pattern(inst, route, perm):
    idx = {u: k + 1 for k, u in enumerate(perm)}
    out = ["o"]
    for st in route.stops[1:]:
        for u in st.pickups:
            out.append(f"s{idx[u]}")
        for u in st.deliveries:
            out.append(f"t{idx[u]}")
    return out


def test_route_case_one():
    inst, pair = _chain(3, 3)
    r = assemble_route(inst, pair, None, 3)
    assert _pattern(inst, r, pair.perm) == "o s1 s2 s3 t1 t2 t3".split()


def test_route_fragments():
    inst, pair = _chain(7, 3)
    r = assemble_route(inst, pair, partition_fragments(pair, 3, 2), 3)
    want = "o s1 s2 t1 t2 s3 s4 s5 t3 t4 t5 s6 s7 t6 t7".split()
    assert _pattern(inst, r, pair.perm) == want


def test_route_minimal():
    inst, pair = _chain(1, 1)
    assert _pattern(inst, assemble_route(inst, pair, None, 1), pair.perm) == ["o", "s1", "t1"]


def test_single_request_is_optimal():
    inst = Instance(line_metric([0, 7]), 1, (0,), ((0, 1),))
    sol = solve_alg1(inst)
    assert sol.weight == 7.0 == exact_mdarp(inst).value


def test_line_example():
    inst = Instance(line_metric(range(5)), 2, (0,), ((1, 2), (3, 4)))
    sol = solve_alg1(inst)
    assert sol.routes[0].vertices() == [0, 1, 3, 2, 4]
    assert sol.weight == 6.0
    assert exact_mdarp(inst).value == 4.0


def test_theta_weights_match_routes():
    inst, pair = _chain(7, 3)
    ws = theta_weights(inst, pair, 3)
    for th in (1, 2, 3):
        r = assemble_route(inst, pair, partition_fragments(pair, 3, th), 3)
        assert ws[th - 1] == pytest.approx(r.weight(inst.metric))


def test_fixed_theta_and_out_of_range():
    inst, _ = _chain(7, 3)
    assert solve_alg1(inst, theta=2).algorithm == "alg1-theta"
    with pytest.raises(ThetaOutOfRange):
        solve_alg1(inst, theta=4)


def test_randomized_is_seeded():
    inst, _ = _chain(9, 2)
    a = solve_alg1(inst, "randomized", seed=11)
    b = solve_alg1(inst, "randomized", seed=11)
    assert a.routes == b.routes and a.meta["theta"] == b.meta["theta"]


@settings(max_examples=60, deadline=None)
@given(instances(), st.integers(0, 2**16))
def test_alg1_feasible_and_certified(inst, seed):
    opt = exact_mdarp(inst).value
    det = solve_alg1(inst)
    assert verify_solution(inst, det).ok
    assert det.weight >= opt - 1e-9
    assert det.meta["certificate"]["ok"]
    rnd = solve_alg1(inst, "randomized", seed=seed)
    assert verify_solution(inst, rnd).ok
    assert rnd.weight >= det.weight - 1e-9


@settings(max_examples=40, deadline=None)
@given(instances())
def test_derandomized_is_best_theta(inst):
    pairs = consistent_tour_sets(inst)
    lam = inst.capacity
    det = solve_alg1(inst)
    for pair, route in zip(pairs, det.routes):
        if len(pair) > lam:
            ws = theta_weights(inst, pair, lam)
            assert route.weight(inst.metric) == pytest.approx(ws.min())
