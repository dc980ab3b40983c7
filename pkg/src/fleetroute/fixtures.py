"""The seven demonstration instances.

Coordinates are synthetic but fixed, laid out so each scenario's headline
claim holds exactly (for example PD12's delivery totals saturate W = D = 110,
and PD15's two-truck split works out to 70 + 70). Time windows are derived
from the arrival times of a designed reference route, so the windowed
scenarios are feasible by construction. Where a scenario's published capacity
arithmetic requires more routes than trucks, the truck is allowed a second
run via ``max_uses``.

Pickup/delivery color scheme: "red" orders pick up more than they deliver
(load grows at the stop), "green" orders deliver more than they pick up.
"""

from __future__ import annotations

import math

from .model import Instance, Order, VehicleSpec, travel_matrix_from_coords

FIXTURE_NAMES = ("PD12", "PD15", "PD10_TW", "PD17_TW", "PD17_MR", "RW1_O19", "RW2_O24")
_VARIANT_NAMES = ("PD12", "PD15")


def _ring(cx: float, cy: float, radius: float, count: int, start_deg: float = 0.0):
    pts = []
    for k in range(count):
        theta = math.radians(start_deg + k * 360.0 / count)
        pts.append((round(cx + radius * math.cos(theta), 6),
                    round(cy + radius * math.sin(theta), 6)))
    return pts


def _arrivals(depot, points):
    """Arrival times along depot -> points[0] -> ... -> points[-1] at speed 1."""
    out = []
    t = 0.0
    prev = depot
    for pt in points:
        t += math.hypot(pt[0] - prev[0], pt[1] - prev[1])
        out.append(t)
        prev = pt
    return out


def _loads(variant: str, kind: str):
    """(wd, dd, wp, dp) for a normal/red/green order under variant A or B."""
    if variant == "A":
        return (10.0, 10.0, 0.0, 0.0)
    if kind == "red":
        return (5.0, 5.0, 15.0, 15.0)
    if kind == "green":
        return (15.0, 15.0, 5.0, 5.0)
    return (10.0, 10.0, 10.0, 10.0)


def _build(name, depot, points, orders, fleet) -> Instance:
    coords = [depot] + list(points)
    return Instance(
        name=name,
        orders=tuple(orders),
        fleet=tuple(fleet),
        travel=travel_matrix_from_coords(coords),
        coords=tuple(coords),
    )


def _pd12(variant: str) -> Instance:
    # 11 orders, one truck, W=D=110; variant B's totals also sum to 110 on
    # both the delivery and the pickup side, so the load trajectory must dip
    # at green stops before red stops fit.
    depot = (0.0, 0.0)
    points = [(30.0, 10.0), (45.0, 25.0), (40.0, 45.0), (20.0, 55.0), (-5.0, 50.0),
              (-25.0, 40.0), (-35.0, 20.0), (-30.0, -10.0), (-15.0, -30.0),
              (10.0, -35.0), (28.0, -18.0)]
    kinds = {2: "red", 5: "red", 9: "red", 3: "green", 7: "green", 11: "green"}
    orders = []
    for k in range(1, 12):
        wd, dd, wp, dp = _loads(variant, kinds.get(k, "normal"))
        orders.append(Order(id=f"o{k}", node=k, wd=wd, dd=dd, wp=wp, dp=dp))
    fleet = [VehicleSpec(id="truck", W=110.0, D=110.0, vt=1)]
    return _build(f"PD12_{variant}", depot, points, orders, fleet)


def _pd15(variant: str) -> Instance:
    # 14 orders in two clusters, two identical trucks with W=D=70. Under
    # variant B every feasible 7-stop route carries equally many red and green
    # orders, so both routes pack to exactly 70.
    depot = (0.0, 0.0)
    east = [(30.0, 15.0), (45.0, 10.0), (55.0, 25.0), (45.0, 40.0),
            (30.0, 35.0), (38.0, 26.0), (50.0, 33.0)]
    west = [(-30.0, -10.0), (-45.0, -15.0), (-55.0, -30.0), (-42.0, -42.0),
            (-28.0, -35.0), (-36.0, -25.0), (-50.0, -40.0)]
    kinds = {2: "red", 8: "red", 11: "red", 4: "green", 9: "green", 12: "green"}
    orders = []
    for k in range(1, 15):
        wd, dd, wp, dp = _loads(variant, kinds.get(k, "normal"))
        orders.append(Order(id=f"o{k}", node=k, wd=wd, dd=dd, wp=wp, dp=dp))
    fleet = [VehicleSpec(id="truck1", W=70.0, D=70.0, vt=1),
             VehicleSpec(id="truck2", W=70.0, D=70.0, vt=1)]
    return _build(f"PD15_{variant}", depot, east + west, orders, fleet)


def _pd10_tw() -> Instance:
    # 9 orders on a ring, one truck W=D=110, flat 10-unit loads both ways.
    # Four window categories relative to the ring tour: upper-only (o2, o3),
    # two-sided (o5), lower-only (o7, o8), none (o1, o4, o6, o9).
    depot = (0.0, 0.0)
    points = _ring(0.0, 0.0, 30.0, 9)
    arr = _arrivals(depot, points)
    windows = {
        2: (0.0, arr[1] + 25.0),
        3: (0.0, arr[2] + 25.0),
        5: (arr[4] - 25.0, arr[4] + 25.0),
        7: (arr[6] - 25.0, math.inf),
        8: (arr[7] - 25.0, math.inf),
    }
    orders = []
    for k in range(1, 10):
        lt, ut = windows.get(k, (0.0, math.inf))
        orders.append(Order(id=f"o{k}", node=k, wd=10.0, dd=10.0, wp=10.0, dp=10.0,
                            lt=round(lt, 6), ut=ut if math.isinf(ut) else round(ut, 6)))
    fleet = [VehicleSpec(id="truck", W=110.0, D=110.0, vt=1)]
    return _build("PD10_TW", depot, points, orders, fleet)


def _pd17_tw() -> Instance:
    # 16 orders split morning/afternoon. The morning ring sits near the depot
    # (reachable early); the afternoon cluster sits far enough away that its
    # lower limit is already satisfied by the travel out to it. Two trucks,
    # two runs each.
    depot = (0.0, 0.0)
    morning = _ring(0.0, 0.0, 35.0, 8)
    afternoon = _ring(150.0, 0.0, 25.0, 8, start_deg=180.0)
    orders = []
    for k, _pt in enumerate(morning, start=1):
        orders.append(Order(id=f"m{k}", node=k, wd=10.0, dd=10.0, wp=10.0, dp=10.0,
                            lt=0.0, ut=130.0))
    for k, _pt in enumerate(afternoon, start=1):
        orders.append(Order(id=f"a{k}", node=8 + k, wd=10.0, dd=10.0, wp=10.0, dp=10.0,
                            lt=120.0, ut=230.0))
    fleet = [VehicleSpec(id="truck1", W=70.0, D=70.0, vt=1, max_uses=2),
             VehicleSpec(id="truck2", W=70.0, D=70.0, vt=1, max_uses=2)]
    return _build("PD17_TW", depot, morning + afternoon, orders, fleet)


def _pd17_mr() -> Instance:
    # 16 delivery-only orders: 6 in a restricted inner zone (ot=1), 10 outside
    # (ot=2). The owned vt=2 truck cannot enter the inner zone, so those six
    # need the rentable vt=1 truck.
    depot = (0.0, 0.0)
    inner = _ring(0.0, 0.0, 15.0, 6, start_deg=30.0)
    outer = _ring(0.0, 0.0, 45.0, 10)
    orders = []
    for k, _pt in enumerate(inner, start=1):
        orders.append(Order(id=f"z{k}", node=k, wd=10.0, dd=10.0, ot=1))
    for k, _pt in enumerate(outer, start=1):
        orders.append(Order(id=f"o{k}", node=6 + k, wd=10.0, dd=10.0, ot=2))
    fleet = [VehicleSpec(id="owned", W=70.0, D=70.0, vt=2, max_uses=2),
             VehicleSpec(id="rental", W=70.0, D=70.0, vt=1, ownership="rentable")]
    return _build("PD17_MR", depot, inner + outer, orders, fleet)


def _rw1_o19() -> Instance:
    # 18 orders combining everything: an eastern loop only the vt=2 truck
    # serves efficiently (ot=2), a mirrored western loop in a restricted zone
    # (ot=1), pickups on both, and windows pinned to the designed loops.
    depot = (0.0, 0.0)
    east = [(25.0, 8.0), (48.0, 16.0), (70.0, 28.0), (88.0, 44.0), (100.0, 64.0),
            (86.0, 84.0), (64.0, 92.0), (42.0, 84.0), (28.0, 64.0)]
    west = [(-x, -y) for x, y in east]
    arr_e = _arrivals(depot, east)
    arr_w = _arrivals(depot, west)

    def group(prefix, pts, arr, ot, kinds, boxed, lt_only, ut_only, node0):
        out = []
        for k in range(1, 10):
            lt, ut = 0.0, math.inf
            if k in boxed:
                lt, ut = arr[k - 1] - 25.0, arr[k - 1] + 25.0
            elif k == lt_only:
                lt = arr[k - 1] - 20.0
            elif k == ut_only:
                ut = arr[k - 1] + 30.0
            wd, dd, wp, dp = _loads("B", kinds.get(k, "normal"))
            out.append(Order(id=f"{prefix}{k}", node=node0 + k, wd=wd, dd=dd,
                             wp=wp, dp=dp, lt=round(lt, 6),
                             ut=ut if math.isinf(ut) else round(ut, 6), ot=ot))
        return out

    east_orders = group("e", east, arr_e, ot=2,
                        kinds={3: "red", 6: "red", 2: "green", 8: "green"},
                        boxed={3, 5}, lt_only=7, ut_only=2, node0=0)
    west_orders = group("w", west, arr_w, ot=1,
                        kinds={5: "red", 7: "red", 2: "green", 4: "green"},
                        boxed={3, 5}, lt_only=7, ut_only=2, node0=9)
    fleet = [VehicleSpec(id="big", W=110.0, D=110.0, vt=2),
             VehicleSpec(id="small", W=100.0, D=100.0, vt=1)]
    return _build("RW1_O19", depot, east + west, east_orders + west_orders, fleet)


def _rw2_o24() -> Instance:
    # 23 orders, the largest scenario: a 15-order loop for the big restricted
    # truck (ot=2) and an 8-order cluster in a small-vehicle zone (ot=1)
    # handled by the small truck in two runs.
    depot = (0.0, 0.0)
    loop = _ring(55.0, 10.0, 45.0, 15, start_deg=180.0)
    cluster = _ring(-70.0, -20.0, 18.0, 8)
    arr = _arrivals(depot, loop)
    kinds = {4: "red", 8: "red", 12: "red", 3: "green", 7: "green", 11: "green"}
    orders = []
    for k in range(1, 16):
        wd, dd, wp, dp = _loads("B", kinds.get(k, "normal"))
        lt, ut = 0.0, math.inf
        if k in (5, 10):
            lt, ut = arr[k - 1] - 35.0, arr[k - 1] + 35.0
        elif k == 13:
            lt = arr[k - 1] - 30.0
        elif k == 2:
            ut = arr[k - 1] + 40.0
        orders.append(Order(id=f"b{k}", node=k, wd=wd, dd=dd, wp=wp, dp=dp,
                            lt=round(max(lt, 0.0), 6),
                            ut=ut if math.isinf(ut) else round(ut, 6), ot=2))
    for k in range(1, 9):
        kind = "red" if k == 5 else ("green" if k == 2 else "normal")
        wd, dd, wp, dp = _loads("B", kind)
        orders.append(Order(id=f"s{k}", node=15 + k, wd=wd, dd=dd, wp=wp, dp=dp, ot=1))
    fleet = [VehicleSpec(id="big", W=160.0, D=160.0, vt=2),
             VehicleSpec(id="small", W=70.0, D=70.0, vt=1, max_uses=2)]
    return _build("RW2_O24", depot, loop + cluster, orders, fleet)


def generate_fixture(name: str, variant: str = "A") -> Instance:
    """Build one of the named demonstration instances deterministically."""
    if name not in FIXTURE_NAMES:
        raise ValueError(
            f"unknown fixture {name!r}; valid names: {', '.join(FIXTURE_NAMES)}")
    if variant not in ("A", "B"):
        raise ValueError("variant must be 'A' or 'B'")
    if variant == "B" and name not in _VARIANT_NAMES:
        raise ValueError(f"fixture {name} has no pickup variant; only "
                         f"{' and '.join(_VARIANT_NAMES)} do")
    if name == "PD12":
        return _pd12(variant)
    if name == "PD15":
        return _pd15(variant)
    if name == "PD10_TW":
        return _pd10_tw()
    if name == "PD17_TW":
        return _pd17_tw()
    if name == "PD17_MR":
        return _pd17_mr()
    if name == "RW1_O19":
        return _rw1_o19()
    return _rw2_o24()
