"""Single-route constrained quadratic model.

One route over a subproblem of M orders is encoded with M*M binary variables
``x[i][p]`` (order i visited at slot p). Structure constraints keep assignments
decodable as a prefix-packed stop sequence; capacity, time-window, duration and
mobility constraints mirror the physical rules the validator checks.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .model import Order, Route, TravelMatrix, VehicleSpec

LE = "<="
GE = ">="
EQ = "=="

SLACK_TOL = 1e-9

MODEL_FORMAT = "route-model"
MODEL_VERSION = 1


class EmptySubproblemError(ValueError):
    """Raised when a model is requested for a subproblem with no orders."""


@dataclass(frozen=True)
class FilteredSubproblem:
    """Orders reachable by one vehicle, with travel restricted to depot + orders.

    In the restricted matrix, index 0 is the depot and index k+1 is orders[k].
    """

    orders: tuple[Order, ...]
    lt_vec: tuple[float, ...]
    ut_vec: tuple[float, ...]
    vehicle: VehicleSpec
    travel: TravelMatrix


def build_subproblem(orders, vehicle: VehicleSpec, travel: TravelMatrix) -> FilteredSubproblem:
    """Restrict the full travel matrix to depot + the given orders."""
    orders = tuple(orders)
    nodes = [0] + [o.node for o in orders]
    return FilteredSubproblem(
        orders=orders,
        lt_vec=tuple(o.lt for o in orders),
        ut_vec=tuple(o.ut for o in orders),
        vehicle=vehicle,
        travel=travel.restrict(nodes),
    )


@dataclass(frozen=True)
class ObjectiveWeights:
    """Objective knobs. ``serve_reward`` (A) defaults to 10x the largest
    distance entry, which makes serving an extra order always worth a detour."""

    serve_reward: float | None = None

    def resolve(self, sub: FilteredSubproblem) -> float:
        if self.serve_reward is not None:
            return self.serve_reward
        dmax = float(sub.travel.dist.max())
        return 10.0 * dmax if dmax > 0 else 1.0


def var_label(i: int, p: int) -> str:
    return f"x[{i}][{p}]"


@dataclass
class Constraint:
    label: str
    linear: dict[str, float]
    quadratic: dict[tuple[str, str], float]
    sense: str
    rhs: float

    def value(self, assignment) -> float:
        total = 0.0
        for var, coeff in self.linear.items():
            if assignment[var]:
                total += coeff
        for (a, b), coeff in self.quadratic.items():
            if assignment[a] and assignment[b]:
                total += coeff
        return total

    def violation(self, assignment) -> float:
        value = self.value(assignment)
        if self.sense == LE:
            return max(0.0, value - self.rhs)
        if self.sense == GE:
            return max(0.0, self.rhs - value)
        return abs(value - self.rhs)


@dataclass
class QuadraticModel:
    m: int
    variables: list[str]
    objective_linear: dict[str, float] = field(default_factory=dict)
    objective_quadratic: dict[tuple[str, str], float] = field(default_factory=dict)
    constraints: list[Constraint] = field(default_factory=list)
    serve_reward: float | None = field(default=None, compare=False)

    def constraint(self, label: str) -> Constraint:
        for c in self.constraints:
            if c.label == label:
                return c
        raise KeyError(label)

    def constraint_labels(self) -> list[str]:
        return [c.label for c in self.constraints]

    def objective_value(self, assignment) -> float:
        total = 0.0
        for var, coeff in self.objective_linear.items():
            if assignment[var]:
                total += coeff
        for (a, b), coeff in self.objective_quadratic.items():
            if assignment[a] and assignment[b]:
                total += coeff
        return total

    def violations(self, assignment) -> dict[str, float]:
        return {c.label: c.violation(assignment) for c in self.constraints}

    def is_feasible(self, assignment, tol: float = SLACK_TOL) -> bool:
        return all(c.violation(assignment) <= tol for c in self.constraints)


def _new_model(m: int) -> QuadraticModel:
    labels = [var_label(i, p) for i in range(m) for p in range(m)]
    return QuadraticModel(m=m, variables=labels)


def _pair(m: int, i: int, p: int, j: int, q: int) -> tuple[str, str]:
    # canonical order by grid index so coefficient maps stay deterministic
    if i * m + p <= j * m + q:
        return (var_label(i, p), var_label(j, q))
    return (var_label(j, q), var_label(i, p))


def _add(terms: dict, key, coeff: float) -> None:
    terms[key] = terms.get(key, 0.0) + coeff


def emit_structure_constraints(model: QuadraticModel, m: int) -> None:
    """Slot uniqueness, serve-at-most-once and prefix contiguity."""
    for p in range(m):
        linear = {var_label(i, p): 1.0 for i in range(m)}
        model.constraints.append(Constraint(f"slot_unique[{p}]", linear, {}, LE, 1.0))
    for i in range(m):
        linear = {var_label(i, p): 1.0 for p in range(m)}
        model.constraints.append(Constraint(f"order_once[{i}]", linear, {}, LE, 1.0))
    for p in range(m - 1):
        linear: dict[str, float] = {}
        for i in range(m):
            _add(linear, var_label(i, p + 1), 1.0)
            _add(linear, var_label(i, p), -1.0)
        model.constraints.append(Constraint(f"contig[{p}]", linear, {}, LE, 0.0))


def emit_capacity_constraints(model: QuadraticModel, sub: FilteredSubproblem) -> None:
    """Running load at every slot (pickups so far + deliveries still on board)
    and the departure load, for both capacity axes."""
    m = len(sub.orders)
    W, D = sub.vehicle.W, sub.vehicle.D
    for axis, pick, drop, cap in (("w", "wp", "wd", W), ("d", "dp", "dd", D)):
        for p in range(m):
            linear: dict[str, float] = {}
            for pp in range(m):
                attr = pick if pp <= p else drop
                for i, order in enumerate(sub.orders):
                    coeff = getattr(order, attr)
                    if coeff:
                        _add(linear, var_label(i, pp), coeff)
            model.constraints.append(Constraint(f"{axis}_cap[{p}]", linear, {}, LE, cap))
    for axis, drop, cap in (("w", "wd", W), ("d", "dd", D)):
        linear = {}
        for i, order in enumerate(sub.orders):
            coeff = getattr(order, drop)
            if coeff:
                for p in range(m):
                    _add(linear, var_label(i, p), coeff)
        model.constraints.append(Constraint(f"{axis}_depart", linear, {}, LE, cap))


def _arrival_terms(sub: FilteredSubproblem, p: int) -> tuple[dict[str, float], dict[tuple[str, str], float]]:
    """Coefficients of the arrival-time expression at slot p: the depot leg to
    slot 0 plus every inter-slot leg up to p."""
    m = len(sub.orders)
    time = sub.travel.time
    linear: dict[str, float] = {}
    quadratic: dict[tuple[str, str], float] = {}
    for i in range(m):
        _add(linear, var_label(i, 0), float(time[0][i + 1]))
    for pp in range(p):
        for i in range(m):
            for j in range(m):
                if i == j:
                    continue
                coeff = float(time[i + 1][j + 1])
                if coeff:
                    _add(quadratic, _pair(m, i, pp, j, pp + 1), coeff)
    return linear, quadratic


def big_m_bound(sub: FilteredSubproblem) -> float:
    """Relaxation constant: at least any route duration, and at least any lt
    so an unserved windowed order never makes the relaxed constraint bind."""
    m = len(sub.orders)
    entries = sorted(sub.travel.time.ravel().tolist(), reverse=True)
    bound = sum(entries[: m + 1])
    for lt in sub.lt_vec:
        bound = max(bound, lt)
    return bound


def emit_time_constraints(model: QuadraticModel, sub: FilteredSubproblem) -> None:
    """Window constraints conditioned on occupancy: when x[k][p] = 1 the
    arrival at slot p must fall inside order k's window. Orders with lt = 0
    and ut = inf contribute nothing."""
    m = len(sub.orders)
    B = big_m_bound(sub)
    for k, order in enumerate(sub.orders):
        if order.lt > 0:
            for p in range(m):
                linear, quadratic = _arrival_terms(sub, p)
                linear = {v: -c for v, c in linear.items()}
                quadratic = {pair: -c for pair, c in quadratic.items()}
                _add(linear, var_label(k, p), B)
                model.constraints.append(
                    Constraint(f"lt[{k}][{p}]", linear, quadratic, LE, B - order.lt))
        if math.isfinite(order.ut):
            for p in range(m):
                linear, quadratic = _arrival_terms(sub, p)
                _add(linear, var_label(k, p), B)
                model.constraints.append(
                    Constraint(f"ut[{k}][{p}]", linear, quadratic, LE, B + order.ut))


def _tour_terms(sub: FilteredSubproblem, matrix) -> tuple[dict[str, float], dict[tuple[str, str], float]]:
    """Coefficients of the full tour length (depot out, inter-slot legs, return
    from the last occupied slot) under the given metric matrix.

    The return leg is exact on structurally valid assignments: every stop
    contributes its return edge, minus the edges of stops that have a
    successor.
    """
    m = len(sub.orders)
    linear: dict[str, float] = {}
    quadratic: dict[tuple[str, str], float] = {}
    for i in range(m):
        _add(linear, var_label(i, 0), float(matrix[0][i + 1]))
    for p in range(m):
        for i in range(m):
            _add(linear, var_label(i, p), float(matrix[i + 1][0]))
    for p in range(m - 1):
        for i in range(m):
            for j in range(m):
                if i == j:
                    continue
                coeff = float(matrix[i + 1][j + 1]) - float(matrix[i + 1][0])
                if coeff:
                    _add(quadratic, _pair(m, i, p, j, p + 1), coeff)
    return linear, quadratic


def emit_duration_constraint(model: QuadraticModel, sub: FilteredSubproblem) -> None:
    """Total route time (including the return leg) bounded by the vehicle's rt.
    Skipped when rt is unbounded."""
    if not math.isfinite(sub.vehicle.rt):
        return
    linear, quadratic = _tour_terms(sub, sub.travel.time)
    model.constraints.append(Constraint("duration", linear, quadratic, LE, float(sub.vehicle.rt)))


def emit_mobility_constraints(model: QuadraticModel, sub: FilteredSubproblem, vt: int) -> None:
    """Zone-compatibility bounds over an unfiltered order set: an order may be
    served at most once if vt <= ot, and never otherwise."""
    m = len(sub.orders)
    for i, order in enumerate(sub.orders):
        bound = 1.0 if vt <= order.ot else 0.0
        linear = {var_label(i, p): 1.0 for p in range(m)}
        model.constraints.append(Constraint(f"mobility[{i}]", linear, {}, LE, bound))


def build_route_model(sub: FilteredSubproblem, weights: ObjectiveWeights | None = None) -> QuadraticModel:
    """Assemble the full single-route model: structure, capacity, time and
    duration constraints, plus the distance-minus-reward objective."""
    m = len(sub.orders)
    if m == 0:
        raise EmptySubproblemError("subproblem has no orders")
    model = _new_model(m)
    emit_structure_constraints(model, m)
    emit_capacity_constraints(model, sub)
    emit_time_constraints(model, sub)
    emit_duration_constraint(model, sub)

    reward = (weights or ObjectiveWeights()).resolve(sub)
    linear, quadratic = _tour_terms(sub, sub.travel.dist)
    for i in range(m):
        for p in range(m):
            _add(linear, var_label(i, p), -reward)
    model.objective_linear = {v: c for v, c in linear.items() if c}
    model.objective_quadratic = {pair: c for pair, c in quadratic.items() if c}
    model.serve_reward = reward
    return model


@dataclass(frozen=True)
class StructuralViolation:
    rule: str
    detail: str


def assignment_from_sequence(m: int, sequence) -> dict[str, int]:
    """Dense 0/1 assignment placing sequence[p] at slot p."""
    assignment = {var_label(i, p): 0 for i in range(m) for p in range(m)}
    for p, i in enumerate(sequence):
        assignment[var_label(i, p)] = 1
    return assignment


def decode(assignment, sub: FilteredSubproblem) -> Route | StructuralViolation:
    """Read the slot-ordered sequence out of an assignment, or report which
    structural rule fails. Derived trajectories come from plain loops over the
    restricted travel matrix, not from the emitted constraints."""
    m = len(sub.orders)
    slots: list[int | None] = []
    for p in range(m):
        occupants = [i for i in range(m) if assignment[var_label(i, p)]]
        if len(occupants) > 1:
            return StructuralViolation("slot-unique", f"slot {p} multiply occupied")
        slots.append(occupants[0] if occupants else None)
    served = [i for i in slots if i is not None]
    if len(set(served)) != len(served):
        dup = next(i for i in served if served.count(i) > 1)
        return StructuralViolation("order-once", f"order {dup} multiply served")
    occupied = [p for p, i in enumerate(slots) if i is not None]
    if occupied and occupied != list(range(len(occupied))):
        gap = next(p for p in range(len(slots)) if slots[p] is None)
        return StructuralViolation("contiguity", f"gap at slot {gap} before an occupied slot")

    sequence = [slots[p] for p in range(len(occupied))]
    time, dist = sub.travel.time, sub.travel.dist
    arrivals: list[float] = []
    t = total_dist = 0.0
    prev = 0
    for i in sequence:
        t += float(time[prev][i + 1])
        total_dist += float(dist[prev][i + 1])
        arrivals.append(t)
        prev = i + 1
    duration = t + float(time[prev][0])
    total_dist += float(dist[prev][0])
    if not sequence:
        duration = total_dist = 0.0

    orders = [sub.orders[i] for i in sequence]
    depart_w = sum(o.wd for o in orders)
    depart_d = sum(o.dd for o in orders)
    w_list, d_list = [], []
    w, d = depart_w, depart_d
    for o in orders:
        w = w - o.wd + o.wp
        d = d - o.dd + o.dp
        w_list.append(w)
        d_list.append(d)
    return Route(
        vehicle=sub.vehicle.id,
        sequence=tuple(o.id for o in orders),
        arrivals=tuple(arrivals),
        duration=duration,
        distance=total_dist,
        depart_weight=depart_w,
        depart_dim=depart_d,
        weight_after=tuple(w_list),
        dim_after=tuple(d_list),
    )


def _grid_index(m: int, label: str) -> int:
    i, p = label[2:-1].split("][")
    return int(i) * m + int(p)


def _sorted_linear(m: int, linear: dict[str, float]) -> dict[str, float]:
    return {k: float(linear[k]) for k in sorted(linear, key=lambda v: _grid_index(m, v))}


def _sorted_quadratic(m: int, quadratic: dict[tuple[str, str], float]) -> list[list]:
    keys = sorted(quadratic, key=lambda ab: (_grid_index(m, ab[0]), _grid_index(m, ab[1])))
    return [[a, b, float(quadratic[(a, b)])] for a, b in keys]


def model_to_dict(model: QuadraticModel) -> dict:
    m = model.m
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "variables": list(model.variables),
        "objective": {
            "linear": _sorted_linear(m, model.objective_linear),
            "quadratic": _sorted_quadratic(m, model.objective_quadratic),
        },
        "constraints": [
            {
                "label": c.label,
                "linear": _sorted_linear(m, c.linear),
                "quadratic": _sorted_quadratic(m, c.quadratic),
                "sense": c.sense,
                "rhs": float(c.rhs),
            }
            for c in model.constraints
        ],
    }


def model_from_dict(data: dict) -> QuadraticModel:
    if data.get("format") != MODEL_FORMAT:
        raise ValueError("not a route-model document")
    if data.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported route-model version {data.get('version')!r}")
    variables = list(data["variables"])
    m = math.isqrt(len(variables))
    model = QuadraticModel(m=m, variables=variables)
    obj = data["objective"]
    model.objective_linear = {k: float(v) for k, v in obj["linear"].items()}
    model.objective_quadratic = {(a, b): float(c) for a, b, c in obj["quadratic"]}
    for c in data["constraints"]:
        model.constraints.append(Constraint(
            label=c["label"],
            linear={k: float(v) for k, v in c["linear"].items()},
            quadratic={(a, b): float(v) for a, b, v in c["quadratic"]},
            sense=c["sense"],
            rhs=float(c["rhs"]),
        ))
    return model


def model_to_bytes(model: QuadraticModel) -> bytes:
    return (json.dumps(model_to_dict(model), indent=2, sort_keys=True) + "\n").encode("utf-8")


def model_from_bytes(data: bytes) -> QuadraticModel:
    return model_from_dict(json.loads(data.decode("utf-8")))
