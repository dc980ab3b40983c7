"""Iterative route construction: pick a vehicle, build and solve one route
model, commit the route, repeat until nothing is left or no progress is made.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .model import RENTABLE, Instance, InvalidInstanceError, Order, Plan, VehicleSpec, check_instance
from .routemodel import (
    FilteredSubproblem,
    ObjectiveWeights,
    StructuralViolation,
    build_route_model,
    build_subproblem,
    decode,
    emit_mobility_constraints,
)
from .solvers import SolverConfig, solve
from .validate import validate_plan

MODE_FILTER = "filter"
MODE_CONSTRAINT = "constraint"

POLICY_OWNED_FIRST = "owned-first-desc-capacity"
POLICY_DECLARED = "declared-order"


@dataclass(frozen=True)
class OrchestratorConfig:
    mobility_mode: str = MODE_FILTER
    vehicle_policy: str = POLICY_OWNED_FIRST
    solver: SolverConfig = field(default_factory=SolverConfig)
    max_rounds: int = 1000
    allow_rentals: bool = True
    serve_reward: float | None = None

    def __post_init__(self):
        if self.mobility_mode not in (MODE_FILTER, MODE_CONSTRAINT):
            raise ValueError(f"unknown mobility mode {self.mobility_mode!r}")
        if self.vehicle_policy not in (POLICY_OWNED_FIRST, POLICY_DECLARED):
            raise ValueError(f"unknown vehicle policy {self.vehicle_policy!r}")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")


def order_filtering(orders, vehicle: VehicleSpec, travel) -> FilteredSubproblem:
    """Classical pre-step: drop orders the vehicle's type cannot reach."""
    kept = [o for o in orders if vehicle.vt <= o.ot]
    return build_subproblem(kept, vehicle, travel)


def select_vehicle(fleet_state, remaining, policy: str = POLICY_OWNED_FIRST,
                   allow_rentals: bool = True) -> VehicleSpec | None:
    """Choose the next vehicle to route.

    ``fleet_state`` is a sequence of (VehicleSpec, uses_left) in declaration
    order. Only vehicles with uses left and at least one reachable order
    qualify; the default policy prefers owned trucks, then larger min(W, D),
    then smaller type, then declaration order.
    """
    best = None
    best_key = None
    for idx, (vehicle, uses) in enumerate(fleet_state):
        if uses < 1:
            continue
        if not allow_rentals and vehicle.ownership == RENTABLE:
            continue
        if not any(vehicle.vt <= o.ot for o in remaining):
            continue
        if policy == POLICY_DECLARED:
            return vehicle
        key = (0 if vehicle.ownership != RENTABLE else 1,
               -min(vehicle.W, vehicle.D), vehicle.vt, idx)
        if best_key is None or key < best_key:
            best, best_key = vehicle, key
    return best


def _instance_reward(instance: Instance, config: OrchestratorConfig) -> float:
    if config.serve_reward is not None:
        return config.serve_reward
    dmax = float(instance.travel.dist.max())
    return 10.0 * dmax if dmax > 0 else 1.0


def plan(instance: Instance, config: OrchestratorConfig | None = None) -> Plan:
    """Run the outer loop over the whole instance.

    Each round selects one vehicle, builds the single-route model over the
    orders it can reach (or over all remaining orders with mobility
    constraints, depending on the mode), solves it and commits the decoded
    route. A round that serves nothing terminates planning; leftover orders
    are reported as unserved. The serve reward is fixed once per instance so
    both mobility modes optimize the same objective.
    """
    config = config or OrchestratorConfig()
    problems = check_instance(instance)
    if problems:
        raise InvalidInstanceError(problems)

    weights = ObjectiveWeights(serve_reward=_instance_reward(instance, config))
    remaining: list[Order] = list(instance.orders)
    uses = {v.id: v.max_uses for v in instance.fleet}
    routes = []

    for _ in range(config.max_rounds):
        if not remaining:
            break
        fleet_state = [(v, uses[v.id]) for v in instance.fleet]
        vehicle = select_vehicle(fleet_state, remaining, config.vehicle_policy,
                                 config.allow_rentals)
        if vehicle is None:
            break
        if config.mobility_mode == MODE_FILTER:
            sub = order_filtering(remaining, vehicle, instance.travel)
        else:
            sub = build_subproblem(remaining, vehicle, instance.travel)
        if not sub.orders:
            break
        model = build_route_model(sub, weights)
        if config.mobility_mode == MODE_CONSTRAINT:
            emit_mobility_constraints(model, sub, vehicle.vt)
        outcome = solve(model, sub, config.solver)
        route = decode(outcome.assignment, sub)
        if isinstance(route, StructuralViolation) or not outcome.feasible or not route.sequence:
            break
        routes.append(route)
        uses[vehicle.id] -= 1
        served = set(route.sequence)
        remaining = [o for o in remaining if o.id not in served]

    result = Plan(
        routes=tuple(routes),
        unserved=tuple(o.id for o in remaining),
        total_distance=sum(r.distance for r in routes),
        total_duration=sum(r.duration for r in routes),
    )
    report = validate_plan(instance, result)
    if not report.ok:
        raise RuntimeError(
            "internal error: committed plan failed validation: "
            + "; ".join(v.describe() for v in report.violations))
    return result


@dataclass(frozen=True)
class EquivalenceReport:
    equal: bool
    mismatches: tuple[str, ...]
    filter_plan: Plan
    constraint_plan: Plan


def mobility_mode_equivalence_check(instance: Instance,
                                    config: OrchestratorConfig | None = None,
                                    tol: float = 1e-9) -> EquivalenceReport:
    """Solve with order filtering and with explicit mobility constraints and
    compare: both modes must commit the same served sets with equal objectives.
    Uses the exact backend so differences can only come from the formulations.
    """
    config = config or OrchestratorConfig()
    solver = replace(config.solver, backend="exact")
    base = replace(config, solver=solver)
    plan_f = plan(instance, replace(base, mobility_mode=MODE_FILTER))
    plan_c = plan(instance, replace(base, mobility_mode=MODE_CONSTRAINT))

    mismatches: list[str] = []
    if len(plan_f.routes) != len(plan_c.routes):
        mismatches.append(
            f"route count differs: {len(plan_f.routes)} vs {len(plan_c.routes)}")
    for idx, (rf, rc) in enumerate(zip(plan_f.routes, plan_c.routes)):
        if set(rf.sequence) != set(rc.sequence):
            mismatches.append(
                f"route {idx} served sets differ: {sorted(rf.sequence)} vs {sorted(rc.sequence)}")
        elif abs(rf.distance - rc.distance) > tol:
            mismatches.append(
                f"route {idx} distance differs: {rf.distance} vs {rc.distance}")
    if set(plan_f.unserved) != set(plan_c.unserved):
        mismatches.append(
            f"unserved sets differ: {sorted(plan_f.unserved)} vs {sorted(plan_c.unserved)}")
    if abs(plan_f.total_distance - plan_c.total_distance) > tol:
        mismatches.append(
            f"total distance differs: {plan_f.total_distance} vs {plan_c.total_distance}")
    return EquivalenceReport(
        equal=not mismatches,
        mismatches=tuple(mismatches),
        filter_plan=plan_f,
        constraint_plan=plan_c,
    )
