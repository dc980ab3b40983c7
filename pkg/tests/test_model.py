import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fleetroute.model import (
    Instance,
    Order,
    TravelMatrix,
    VehicleSpec,
    check_instance,
    travel_matrix_from_coords,
)


def test_single_node_matrices_are_zero():
    tm = travel_matrix_from_coords([(0.0, 0.0)], speed=1.0)
    assert tm.n == 1
    assert tm.dist[0][0] == 0.0
    assert tm.time[0][0] == 0.0


def test_three_four_five_triangle():
    tm = travel_matrix_from_coords([(0, 0), (3, 4)], speed=1.0)
    assert tm.dist[0][1] == pytest.approx(5.0)
    assert tm.time[0][1] == pytest.approx(5.0)
    assert tm.dist[1][0] == pytest.approx(5.0)


def test_speed_scales_time_not_distance():
    tm = travel_matrix_from_coords([(0, 0), (3, 4)], speed=2.0)
    assert tm.dist[0][1] == pytest.approx(5.0)
    assert tm.time[0][1] == pytest.approx(2.5)


def test_bad_coords_rejected():
    with pytest.raises(ValueError):
        travel_matrix_from_coords([(0.0, math.nan)])
    with pytest.raises(ValueError):
        travel_matrix_from_coords([], speed=1.0)
    with pytest.raises(ValueError):
        travel_matrix_from_coords([(0, 0)], speed=0.0)


@given(st.lists(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)),
                min_size=3, max_size=8))
def test_triangle_inequality(points):
    tm = travel_matrix_from_coords(points)
    d = tm.dist
    n = len(points)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                assert d[i][j] <= d[i][k] + d[k][j] + 1e-6


def test_matrices_are_immutable():
    tm = travel_matrix_from_coords([(0, 0), (1, 1)])
    with pytest.raises(ValueError):
        tm.dist[0][1] = 99.0


def _instance(orders, fleet=None, n_extra_nodes=0):
    n = max([o.node for o in orders], default=0) + 1 + n_extra_nodes
    coords = [(float(i), 0.0) for i in range(n)]
    return Instance(
        name="t",
        orders=tuple(orders),
        fleet=tuple(fleet or [VehicleSpec(id="v", W=100, D=100)]),
        travel=travel_matrix_from_coords(coords),
        coords=tuple(coords),
    )


def test_well_formed_instance_passes():
    inst = _instance([
        Order(id="a", node=1, wd=5, dd=5),
        Order(id="b", node=2, wp=5, dp=5),
        Order(id="c", node=3, wd=1, dd=1, wp=1, dp=1, lt=0, ut=50),
    ])
    assert check_instance(inst) == []


def test_inverted_window_named():
    inst = _instance([Order(id="bad", node=1, wd=5, dd=5, lt=10, ut=5)])
    problems = check_instance(inst)
    assert len(problems) == 1
    assert "bad" in problems[0] and "window inverted" in problems[0]


def test_duplicate_node_detected():
    inst = _instance([
        Order(id="a", node=4, wd=5, dd=5),
        Order(id="b", node=4, wd=5, dd=5),
    ], n_extra_nodes=3)
    problems = check_instance(inst)
    assert any("duplicate node" in p for p in problems)


def test_node_out_of_range():
    inst = _instance([Order(id="a", node=1, wd=5, dd=5)])
    bad = Instance(name="t", orders=(Order(id="x", node=9, wd=1, dd=1),),
                   fleet=inst.fleet, travel=inst.travel, coords=inst.coords)
    assert any("out of range" in p for p in check_instance(bad))


def test_empty_request_and_bad_zone():
    inst = _instance([
        Order(id="none", node=1),
        Order(id="zone", node=2, wd=5, dd=5, ot=0),
    ])
    problems = check_instance(inst)
    assert any("none" in p and "neither" in p for p in problems)
    assert any("zone" in p and "ot" in p for p in problems)


def test_vehicle_invariants():
    inst = _instance(
        [Order(id="a", node=1, wd=5, dd=5)],
        fleet=[VehicleSpec(id="v", W=0, D=10, vt=0, max_uses=0, ownership="leased")],
    )
    problems = check_instance(inst)
    assert any("capacities" in p for p in problems)
    assert any("vt" in p for p in problems)
    assert any("max_uses" in p for p in problems)
    assert any("ownership" in p for p in problems)


def test_check_is_pure():
    inst = _instance([Order(id="a", node=1, wd=5, dd=5, lt=9, ut=3)])
    assert check_instance(inst) == check_instance(inst)
