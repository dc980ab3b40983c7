"""Independent plan feasibility checker.

Everything here is recomputed from raw instance data. This module deliberately
shares no arithmetic with the quadratic-model builder so it can serve as the
ground truth that models and solvers are tested against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .model import Instance, Order, Plan, Route, TravelMatrix

SLACK_TOL = 1e-9

RULE_CAPACITY_WEIGHT = "capacity-weight"
RULE_CAPACITY_DIM = "capacity-dim"
RULE_DEPARTURE_LOAD = "departure-load"
RULE_WINDOW_LOWER = "window-lower"
RULE_WINDOW_UPPER = "window-upper"
RULE_DURATION = "duration"
RULE_MOBILITY = "mobility"
RULE_DUPLICATE_ORDER = "duplicate-order"
RULE_UNKNOWN_ORDER = "unknown-order"
RULE_MISSING_ORDER = "missing-order"


@dataclass(frozen=True)
class Violation:
    route: str | None
    rule: str
    slot: int | None = None
    measured: float | None = None
    bound: float | None = None

    def describe(self) -> str:
        where = f"route {self.route}" if self.route is not None else "plan"
        pos = f" slot {self.slot}" if self.slot is not None else ""
        detail = ""
        if self.measured is not None:
            detail = f" (measured {self.measured:g}, bound {self.bound:g})"
        return f"{where}{pos}: {self.rule}{detail}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


def route_timeline(nodes: list[int], travel: TravelMatrix) -> tuple[list[float], float]:
    """Arrival time at each stop plus total duration including the return leg.

    ``nodes`` are travel-matrix node indices of the stops, depot excluded.
    """
    if not nodes:
        raise ValueError("route sequence is empty")
    n = travel.n
    for node in nodes:
        if not (0 <= node < n):
            raise ValueError(f"unknown node {node}")
    time = travel.time
    arrivals = []
    t = 0.0
    prev = 0
    for node in nodes:
        t += float(time[prev][node])
        arrivals.append(t)
        prev = node
    duration = t + float(time[prev][0])
    return arrivals, duration


def route_loads(orders: list[Order]) -> tuple[float, float, list[float], list[float]]:
    """Departure load and the load after each stop, for both capacity axes.

    The truck leaves the depot carrying every delivery on the route; at each
    stop it drops that order's delivery and takes on its pickup.
    """
    depart_w = sum(o.wd for o in orders)
    depart_d = sum(o.dd for o in orders)
    w_after, d_after = [], []
    w, d = depart_w, depart_d
    for o in orders:
        w = w - o.wd + o.wp
        d = d - o.dd + o.dp
        w_after.append(w)
        d_after.append(d)
    return depart_w, depart_d, w_after, d_after


def _check_route(instance: Instance, route: Route, seen: dict[str, str]) -> list[Violation]:
    out: list[Violation] = []
    vehicle = instance.vehicle_by_id(route.vehicle)
    if vehicle is None:
        out.append(Violation(route.vehicle, RULE_UNKNOWN_ORDER, None, None, None))
        return out

    orders: list[Order] = []
    broken = False
    for slot, oid in enumerate(route.sequence):
        if oid in seen:
            out.append(Violation(route.vehicle, RULE_DUPLICATE_ORDER, slot))
            broken = True
        seen[oid] = route.vehicle
        order = instance.order_by_id(oid)
        if order is None:
            out.append(Violation(route.vehicle, RULE_UNKNOWN_ORDER, slot))
            broken = True
            continue
        orders.append(order)
        if vehicle.vt > order.ot:
            out.append(Violation(route.vehicle, RULE_MOBILITY, slot, float(order.ot), float(vehicle.vt)))
    if broken or not orders:
        return out

    depart_w, depart_d, w_after, d_after = route_loads(orders)
    if depart_w > vehicle.W + SLACK_TOL:
        out.append(Violation(route.vehicle, RULE_DEPARTURE_LOAD, None, depart_w, vehicle.W))
    if depart_d > vehicle.D + SLACK_TOL:
        out.append(Violation(route.vehicle, RULE_DEPARTURE_LOAD, None, depart_d, vehicle.D))
    for slot, (w, d) in enumerate(zip(w_after, d_after)):
        if w > vehicle.W + SLACK_TOL:
            out.append(Violation(route.vehicle, RULE_CAPACITY_WEIGHT, slot, w, vehicle.W))
        if d > vehicle.D + SLACK_TOL:
            out.append(Violation(route.vehicle, RULE_CAPACITY_DIM, slot, d, vehicle.D))

    arrivals, duration = route_timeline([o.node for o in orders], instance.travel)
    for slot, (order, arrival) in enumerate(zip(orders, arrivals)):
        if order.lt > 0 and arrival < order.lt - SLACK_TOL:
            out.append(Violation(route.vehicle, RULE_WINDOW_LOWER, slot, arrival, order.lt))
        if math.isfinite(order.ut) and arrival > order.ut + SLACK_TOL:
            out.append(Violation(route.vehicle, RULE_WINDOW_UPPER, slot, arrival, order.ut))
    if math.isfinite(vehicle.rt) and duration > vehicle.rt + SLACK_TOL:
        out.append(Violation(route.vehicle, RULE_DURATION, None, duration, vehicle.rt))
    return out


def validate_plan(instance: Instance, plan: Plan) -> ValidationReport:
    """Check every route against capacities, windows, duration and mobility,
    plus the plan-level partition of orders into served/unserved."""
    violations: list[Violation] = []
    seen: dict[str, str] = {}
    for route in plan.routes:
        violations.extend(_check_route(instance, route, seen))

    for oid in plan.unserved:
        if instance.order_by_id(oid) is None:
            violations.append(Violation(None, RULE_UNKNOWN_ORDER))
        if oid in seen:
            violations.append(Violation(None, RULE_DUPLICATE_ORDER))
        seen.setdefault(oid, "")
    unserved_set = set(plan.unserved)
    if len(unserved_set) != len(plan.unserved):
        violations.append(Violation(None, RULE_DUPLICATE_ORDER))
    for order in instance.orders:
        if order.id not in seen:
            violations.append(Violation(None, RULE_MISSING_ORDER))

    return ValidationReport(tuple(violations))
