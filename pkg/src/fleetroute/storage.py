"""Versioned JSON file formats for instances and plans.

Field names follow the model's parameter names (wd, dd, wp, dp, lt, ut, ot,
W, D, vt, rt) so files read like the formulation. ``null`` encodes an
unbounded ut/rt; a missing lt means 0.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .model import (
    INFINITE,
    Instance,
    InvalidInstanceError,
    Order,
    Plan,
    Route,
    TravelMatrix,
    VehicleSpec,
    check_instance,
    travel_matrix_from_coords,
)
from .validate import ValidationReport, Violation

INSTANCE_FORMAT = "fleetroute-instance"
PLAN_FORMAT = "fleetroute-plan"
SCHEMA_VERSION = 1


class FormatError(ValueError):
    """A document does not match the schema; the message names the path."""


def _fail(path: str, msg: str):
    raise FormatError(f"{path}: {msg}")


def _get_num(obj, key, path, default=None, allow_null_inf=False):
    if key not in obj:
        if default is None:
            _fail(f"{path}.{key}", "missing required number")
        return default
    value = obj[key]
    if value is None and allow_null_inf:
        return INFINITE
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(f"{path}.{key}", "must be a number")
    return float(value)


def _get_int(obj, key, path, default=None):
    if key not in obj:
        if default is None:
            _fail(f"{path}.{key}", "missing required integer")
        return default
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(f"{path}.{key}", "must be an integer")
    return value


def _get_str(obj, key, path, default=None):
    if key not in obj:
        if default is None:
            _fail(f"{path}.{key}", "missing required string")
        return default
    value = obj[key]
    if not isinstance(value, str):
        _fail(f"{path}.{key}", "must be a string")
    return value


def _get_point(obj, key, path):
    value = obj.get(key)
    if (not isinstance(value, list) or len(value) != 2
            or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value)):
        _fail(f"{path}.{key}", "must be a [x, y] pair of numbers")
    return (float(value[0]), float(value[1]))


def _check_header(data, expected_format, path="$"):
    if not isinstance(data, dict):
        _fail(path, "document must be a JSON object")
    if data.get("format") != expected_format:
        _fail(f"{path}.format", f"expected {expected_format!r}")
    version = data.get("version")
    if version != SCHEMA_VERSION:
        _fail(f"{path}.version", f"unsupported version {version!r} (expected {SCHEMA_VERSION})")


def _matrix(data, key, path, n):
    rows = data.get(key)
    if not isinstance(rows, list) or len(rows) != n:
        _fail(f"{path}.{key}", f"must be a {n}x{n} matrix")
    out = []
    for r, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            _fail(f"{path}.{key}[{r}]", f"must have {n} entries")
        for v in row:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                _fail(f"{path}.{key}[{r}]", "entries must be numbers")
        out.append([float(v) for v in row])
    return np.array(out, dtype=float)


def load_instance(data: bytes) -> Instance:
    """Parse and sanity-check an instance document."""
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"not valid UTF-8 JSON: {exc}") from None
    _check_header(doc, INSTANCE_FORMAT)
    name = _get_str(doc, "name", "$")

    orders_doc = doc.get("orders")
    if not isinstance(orders_doc, list):
        _fail("$.orders", "must be a list")
    fleet_doc = doc.get("fleet")
    if not isinstance(fleet_doc, list) or not fleet_doc:
        _fail("$.fleet", "must be a non-empty list")

    has_coords = "depot" in doc
    coords = None
    if has_coords:
        depot = _get_point(doc, "depot", "$")
        coords = [depot]
    orders = []
    for idx, o in enumerate(orders_doc):
        path = f"$.orders[{idx}]"
        if not isinstance(o, dict):
            _fail(path, "must be an object")
        if has_coords:
            coords.append(_get_point(o, "coords", path))
        orders.append(Order(
            id=_get_str(o, "id", path),
            node=idx + 1,
            wd=_get_num(o, "wd", path, default=0.0),
            dd=_get_num(o, "dd", path, default=0.0),
            wp=_get_num(o, "wp", path, default=0.0),
            dp=_get_num(o, "dp", path, default=0.0),
            lt=_get_num(o, "lt", path, default=0.0),
            ut=_get_num(o, "ut", path, default=INFINITE, allow_null_inf=True),
            ot=_get_int(o, "ot", path, default=1),
        ))

    fleet = []
    for idx, v in enumerate(fleet_doc):
        path = f"$.fleet[{idx}]"
        if not isinstance(v, dict):
            _fail(path, "must be an object")
        fleet.append(VehicleSpec(
            id=_get_str(v, "id", path),
            W=_get_num(v, "W", path),
            D=_get_num(v, "D", path),
            vt=_get_int(v, "vt", path, default=1),
            rt=_get_num(v, "rt", path, default=INFINITE, allow_null_inf=True),
            ownership=_get_str(v, "ownership", path, default="owned"),
            max_uses=_get_int(v, "max_uses", path, default=1),
        ))

    n = len(orders) + 1
    if "travel" in doc:
        tdoc = doc["travel"]
        if not isinstance(tdoc, dict):
            _fail("$.travel", "must be an object with time and dist matrices")
        travel = TravelMatrix(_matrix(tdoc, "time", "$.travel", n),
                              _matrix(tdoc, "dist", "$.travel", n))
    elif has_coords:
        speed = _get_num(doc, "speed", "$", default=1.0)
        if speed <= 0:
            _fail("$.speed", "must be positive")
        travel = travel_matrix_from_coords(coords, speed)
    else:
        _fail("$", "needs either depot+coords or explicit travel matrices")

    instance = Instance(
        name=name,
        orders=tuple(orders),
        fleet=tuple(fleet),
        travel=travel,
        coords=tuple(coords) if coords else None,
    )
    problems = check_instance(instance)
    if problems:
        raise InvalidInstanceError(problems)
    return instance


def _dump(doc: dict) -> bytes:
    return (json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n").encode("utf-8")


def save_instance(instance: Instance, speed: float = 1.0) -> bytes:
    """Serialize an instance; coordinates are preferred over raw matrices when
    they reproduce the travel matrices exactly."""
    node_order = [0] + [o.node for o in instance.orders]
    doc: dict = {
        "format": INSTANCE_FORMAT,
        "version": SCHEMA_VERSION,
        "name": instance.name,
    }
    orders_doc = []
    coords_ok = False
    if instance.coords is not None:
        coords = [instance.coords[i] for i in node_order]
        derived = travel_matrix_from_coords(coords, speed)
        reordered_time = instance.travel.time[np.ix_(node_order, node_order)]
        reordered_dist = instance.travel.dist[np.ix_(node_order, node_order)]
        coords_ok = (np.array_equal(derived.time, reordered_time)
                     and np.array_equal(derived.dist, reordered_dist))
        doc["depot"] = list(instance.coords[0])
        doc["speed"] = speed
    for o in instance.orders:
        entry: dict = {"id": o.id, "wd": o.wd, "dd": o.dd, "wp": o.wp, "dp": o.dp,
                       "lt": o.lt, "ut": None if math.isinf(o.ut) else o.ut, "ot": o.ot}
        if instance.coords is not None:
            entry["coords"] = list(instance.coords[o.node])
        orders_doc.append(entry)
    doc["orders"] = orders_doc
    doc["fleet"] = [
        {"id": v.id, "W": v.W, "D": v.D, "vt": v.vt,
         "rt": None if math.isinf(v.rt) else v.rt,
         "ownership": v.ownership, "max_uses": v.max_uses}
        for v in instance.fleet
    ]
    if not coords_ok:
        time = instance.travel.time[np.ix_(node_order, node_order)]
        dist = instance.travel.dist[np.ix_(node_order, node_order)]
        doc["travel"] = {"time": time.tolist(), "dist": dist.tolist()}
    return _dump(doc)


def save_plan(plan: Plan, report: ValidationReport, instance_name: str = "") -> bytes:
    """Serialize a plan together with its validation report."""
    doc = {
        "format": PLAN_FORMAT,
        "version": SCHEMA_VERSION,
        "instance": instance_name,
        "routes": [
            {
                "vehicle": r.vehicle,
                "sequence": list(r.sequence),
                "arrivals": list(r.arrivals),
                "duration": r.duration,
                "distance": r.distance,
                "depart_weight": r.depart_weight,
                "depart_dim": r.depart_dim,
                "weight_after": list(r.weight_after),
                "dim_after": list(r.dim_after),
            }
            for r in plan.routes
        ],
        "unserved": list(plan.unserved),
        "objective": {
            "total_distance": plan.total_distance,
            "total_duration": plan.total_duration,
        },
        "report": {
            "ok": report.ok,
            "violations": [
                {"route": v.route, "rule": v.rule, "slot": v.slot,
                 "measured": v.measured, "bound": v.bound}
                for v in report.violations
            ],
        },
    }
    return _dump(doc)


def _float_list(obj, key, path):
    value = obj.get(key)
    if not isinstance(value, list) or any(
            isinstance(v, bool) or not isinstance(v, (int, float)) for v in value):
        _fail(f"{path}.{key}", "must be a list of numbers")
    return tuple(float(v) for v in value)


def load_plan(data: bytes) -> tuple[str, Plan, ValidationReport]:
    """Parse a plan document; returns (instance name, plan, report)."""
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"not valid UTF-8 JSON: {exc}") from None
    _check_header(doc, PLAN_FORMAT)
    instance_name = _get_str(doc, "instance", "$", default="")

    routes = []
    routes_doc = doc.get("routes")
    if not isinstance(routes_doc, list):
        _fail("$.routes", "must be a list")
    for idx, r in enumerate(routes_doc):
        path = f"$.routes[{idx}]"
        if not isinstance(r, dict):
            _fail(path, "must be an object")
        vid = _get_str(r, "vehicle", path)
        seq = r.get("sequence")
        if not isinstance(seq, list) or any(not isinstance(s, str) for s in seq):
            _fail(path, f"route {vid}: sequence must be a list of order ids")
        routes.append(Route(
            vehicle=vid,
            sequence=tuple(seq),
            arrivals=_float_list(r, "arrivals", path),
            duration=_get_num(r, "duration", path),
            distance=_get_num(r, "distance", path),
            depart_weight=_get_num(r, "depart_weight", path),
            depart_dim=_get_num(r, "depart_dim", path),
            weight_after=_float_list(r, "weight_after", path),
            dim_after=_float_list(r, "dim_after", path),
        ))

    unserved = doc.get("unserved")
    if not isinstance(unserved, list) or any(not isinstance(s, str) for s in unserved):
        _fail("$.unserved", "must be a list of order ids")
    objective = doc.get("objective")
    if not isinstance(objective, dict):
        _fail("$.objective", "must be an object")
    plan = Plan(
        routes=tuple(routes),
        unserved=tuple(unserved),
        total_distance=_get_num(objective, "total_distance", "$.objective"),
        total_duration=_get_num(objective, "total_duration", "$.objective"),
    )

    report_doc = doc.get("report")
    if not isinstance(report_doc, dict) or not isinstance(report_doc.get("violations"), list):
        _fail("$.report", "must be an object with a violations list")
    violations = []
    for idx, v in enumerate(report_doc["violations"]):
        path = f"$.report.violations[{idx}]"
        if not isinstance(v, dict):
            _fail(path, "must be an object")
        route = v.get("route")
        if route is not None and not isinstance(route, str):
            _fail(f"{path}.route", "must be a string or null")
        slot = v.get("slot")
        if slot is not None and (isinstance(slot, bool) or not isinstance(slot, int)):
            _fail(f"{path}.slot", "must be an integer or null")
        measured = v.get("measured")
        bound = v.get("bound")
        for field_name, value in (("measured", measured), ("bound", bound)):
            if value is not None and (isinstance(value, bool) or not isinstance(value, (int, float))):
                _fail(f"{path}.{field_name}", "must be a number or null")
        violations.append(Violation(
            route=route,
            rule=_get_str(v, "rule", path),
            slot=slot,
            measured=None if measured is None else float(measured),
            bound=None if bound is None else float(bound),
        ))
    return instance_name, plan, ValidationReport(tuple(violations))
