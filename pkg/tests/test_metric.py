import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mdarp.errors import DimensionMismatch, InvalidVertexId, MetricViolation, SchemaError
from mdarp.metric import (
    Instance, MetricSpace, RequestSpec, induced_submetric, instance_to_dict, line_metric,
    load_instance, normalize_vehicles, save_instance, shortest_path_closure, validate_metric,
)

from helpers import instances


def test_line_is_metric():
    sp = MetricSpace(dist=[[abs(i - j) for j in range(3)] for i in range(3)])
    assert validate_metric(sp) == []


def test_symmetry_violation():
    bad = validate_metric(np.array([[0, 1.0], [2.0, 0]]))
    assert [(v.kind, v.where) for v in bad] == [("Symmetry", (0, 1))]


def test_triangle_violation():
    d = np.array([[0, 1, 10], [1, 0, 1], [10, 1, 0]], dtype=float)
    bad = validate_metric(d)
    assert len(bad) == 1
    v = bad[0]
    assert v.kind == "Triangle" and v.where == (0, 1, 2) and v.magnitude == pytest.approx(8.0)


def test_diagonal_and_negative():
    kinds = {v.kind for v in validate_metric(np.array([[1.0, -1], [-1, 0]]))}
    assert {"Diagonal", "Negative"} <= kinds


def test_triangle_tolerance():
    d = np.array([[0, 1, 2 + 1e-12], [1, 0, 1], [2 + 1e-12, 1, 0]])
    assert validate_metric(d) == []


@pytest.mark.parametrize("veh,want,mapping", [
    ((0, 0, 3), (0, 3), {0: 0, 1: 0, 2: 3}),
    ((2,), (2,), {0: 2}),
    ((1, 4, 1, 4), (1, 4), {0: 1, 1: 4, 2: 1, 3: 4}),
])
def test_normalize_vehicles(veh, want, mapping):
    inst = Instance(line_metric(range(5)), 1, veh, ())
    norm, mp = normalize_vehicles(inst)
    assert norm.vehicles == want
    assert mp == mapping
    if len(veh) == len(want):
        assert norm is inst


def test_induced_submetric_examples():
    L = MetricSpace(dist=[[abs(i - j) for j in range(4)] for i in range(4)])
    assert np.array_equal(induced_submetric(L, range(4)).table, L.table)
    assert np.array_equal(induced_submetric(L, [2, 2]).table, np.zeros((2, 2)))
    assert induced_submetric(L, [0, 3]).d(0, 1) == 3.0
    with pytest.raises(InvalidVertexId):
        induced_submetric(L, [0, 9])


def test_coords_and_table_agree():
    rng = np.random.default_rng(3)
    P = rng.random((30, 2))
    a = MetricSpace(coords=P)
    b = MetricSpace(dist=a.table)
    for u in (0, 7, 29):
        assert np.array_equal(a.row(u), b.row(u))
    assert np.array_equal(a.rows([3, 4, 5]), np.stack([a.row(3), a.row(4), a.row(5)]))
    assert not MetricSpace(coords=P).has_table


def test_dimension_checks():
    with pytest.raises(DimensionMismatch):
        MetricSpace(dist=np.zeros((2, 3)))
    with pytest.raises(DimensionMismatch):
        MetricSpace(coords=np.zeros((4, 3)))


def test_shortest_path_closure():
    inf = np.inf
    W = np.array([[0, 1, inf], [1, 0, 2], [inf, 2, 0]])
    D = shortest_path_closure(W)
    assert D[0, 2] == 3.0
    assert validate_metric(D) == []


def test_minimal_document():
    doc = {"capacity": 1, "vertices": [{"id": 0}, {"id": 1}], "distances": [[0, 5], [5, 0]],
           "vehicles": [0], "requests": [{"src": 0, "dst": 1}]}
    inst = load_instance(json.dumps(doc))
    assert inst.m == 1 and inst.metric.d(0, 1) == 5.0


def test_missing_vehicles():
    doc = {"capacity": 1, "vertices": [{"id": 0}, {"id": 1}], "distances": [[0, 5], [5, 0]],
           "requests": []}
    with pytest.raises(SchemaError) as ei:
        load_instance(json.dumps(doc))
    assert ei.value.path == "vehicles"


def test_coords_document():
    doc = {"capacity": 2, "vertices": [{"id": 0, "coords": [0, 0]}, {"id": 1, "coords": [3, 4]}],
           "vehicles": [0], "requests": []}
    assert load_instance(json.dumps(doc)).metric.d(0, 1) == 5.0


def test_rejects_non_metric_document():
    doc = {"capacity": 1, "vertices": [{"id": i} for i in range(3)],
           "distances": [[0, 1, 10], [1, 0, 1], [10, 1, 0]], "vehicles": [0], "requests": []}
    with pytest.raises(MetricViolation):
        load_instance(json.dumps(doc))


@pytest.mark.parametrize("breakage,path", [
    (lambda d: d.update(capacity=0), "capacity"),
    (lambda d: d.update(vehicles=[7]), "vehicles[0]"),
    (lambda d: d["requests"].append({"src": 0, "dst": 9}), "requests[1].dst"),
    (lambda d: d["requests"].append({"src": 0, "dst": 1, "count": 0}), "requests[1].count"),
])
def test_schema_paths(breakage, path):
    doc = {"capacity": 1, "vertices": [{"id": 0}, {"id": 1}], "distances": [[0, 5], [5, 0]],
           "vehicles": [0], "requests": [{"src": 0, "dst": 1}]}
    breakage(doc)
    with pytest.raises(SchemaError) as ei:
        load_instance(json.dumps(doc))
    assert ei.value.path == path


def test_unit_requests_expand_counts():
    inst = Instance(line_metric(range(3)), 2, (0,), (RequestSpec(0, 1, 3), RequestSpec(2, 1)))
    assert inst.unit_requests() == ((0, 0), (0, 1), (0, 2), (1, 0))
    assert inst.src((1, 0)) == 2 and inst.dst((0, 2)) == 1


@settings(max_examples=60, deadline=None)
@given(instances())
def test_roundtrip(inst):
    back = load_instance(save_instance(inst))
    assert instance_to_dict(back) == instance_to_dict(inst)
    assert save_instance(back) == save_instance(inst)


@settings(max_examples=60, deadline=None)
@given(instances(), st.data())
def test_submetric_keeps_axioms(inst, data):
    sub = data.draw(st.lists(st.integers(0, inst.n - 1), min_size=1, max_size=8))
    assert validate_metric(induced_submetric(inst.metric, sub)) == []


@settings(max_examples=60, deadline=None)
@given(instances())
def test_normalize_idempotent(inst):
    veh = inst.vehicles + inst.vehicles[:1]
    norm, mp = normalize_vehicles(inst.replace(vehicles=veh))
    again, mp2 = normalize_vehicles(norm)
    assert again is norm
    assert len(set(norm.vehicles)) == norm.h
    assert set(mp.values()) == set(norm.vehicles)
