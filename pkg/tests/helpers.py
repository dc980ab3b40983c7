"""Shared test utilities: independent oracles and random generators.

The brute-force search and the batch constraint evaluator here deliberately
re-derive everything from the model's stored coefficients (or from raw
itertools enumeration) so they share no code path with the solvers they
check.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import replace

import numpy as np

from fleetroute.model import Instance, Order, Plan, VehicleSpec, travel_matrix_from_coords
from fleetroute.planner import order_filtering
from fleetroute.routemodel import (
    FilteredSubproblem,
    StructuralViolation,
    assignment_from_sequence,
    build_subproblem,
    decode,
)
from fleetroute.validate import validate_plan

SLACK = 1e-9


def brute_force_best(model, sub: FilteredSubproblem):
    """Best (objective, sequence) over every ordered subset of orders, judged
    purely by the model's own stored constraints. O(sum k! C(m,k)) — keep m small."""
    m = len(sub.orders)
    best = None
    for k in range(m + 1):
        for subset in itertools.combinations(range(m), k):
            for perm in itertools.permutations(subset):
                a = assignment_from_sequence(m, perm)
                if any(v > SLACK for v in model.violations(a).values()):
                    continue
                obj = model.objective_value(a)
                if best is None or obj < best[0] - 1e-12:
                    best = (obj, perm)
    return best


def sub_as_instance(sub: FilteredSubproblem, name: str = "sub") -> Instance:
    """Re-package a subproblem as a standalone instance for the validator."""
    orders = tuple(replace(o, node=k + 1) for k, o in enumerate(sub.orders))
    return Instance(name=name, orders=orders, fleet=(sub.vehicle,), travel=sub.travel)


def validator_accepts(sub: FilteredSubproblem, assignment) -> bool:
    """Ground truth: decode the assignment and run the full validator on it."""
    route = decode(assignment, sub)
    if isinstance(route, StructuralViolation):
        return False
    served = set(route.sequence)
    plan = Plan(
        routes=(route,) if route.sequence else (),
        unserved=tuple(o.id for o in sub.orders if o.id not in served),
        total_distance=route.distance,
        total_duration=route.duration,
    )
    return validate_plan(sub_as_instance(sub), plan).ok


def random_orders(rng: random.Random, count: int, *, window_rate=0.4,
                  pickup_rate=0.6, zones=(1, 2, 3)) -> list[Order]:
    orders = []
    for k in range(count):
        wd = rng.choice([0, 5, 10, 15])
        dd = rng.choice([0, 5, 10, 15])
        wp = rng.choice([0, 5, 10, 20]) if rng.random() < pickup_rate else 0
        dp = rng.choice([0, 5, 10, 20]) if rng.random() < pickup_rate else 0
        if wd + dd + wp + dp == 0:
            wd = dd = 10
        lt, ut = 0.0, math.inf
        if rng.random() < window_rate:
            if rng.random() < 0.5:
                lt = round(rng.uniform(10, 120), 1)
            if rng.random() < 0.7:
                ut = round(lt + rng.uniform(15, 150), 1)
        orders.append(Order(id=f"r{k + 1}", node=k + 1, wd=wd, dd=dd, wp=wp, dp=dp,
                            lt=lt, ut=ut, ot=rng.choice(zones)))
    return orders


def random_vehicle(rng: random.Random, ident: str = "veh", *, vts=(1, 2, 3)) -> VehicleSpec:
    rt = math.inf if rng.random() < 0.7 else round(rng.uniform(150, 450), 1)
    return VehicleSpec(
        id=ident,
        W=rng.choice([30, 45, 60, 90]),
        D=rng.choice([30, 45, 60, 90]),
        vt=rng.choice(vts),
        rt=rt,
        ownership=rng.choice(["owned", "rentable"]),
        max_uses=rng.choice([1, 1, 2]),
    )


def random_instance(rng: random.Random, n_orders: int, *, n_vehicles=2,
                    name="rand", window_rate=0.4, zones=(1, 2, 3)) -> Instance:
    coords = [(0.0, 0.0)]
    coords += [(round(rng.uniform(-50, 50), 3), round(rng.uniform(-50, 50), 3))
               for _ in range(n_orders)]
    orders = random_orders(rng, n_orders, window_rate=window_rate, zones=zones)
    fleet = [random_vehicle(rng, f"v{i + 1}") for i in range(n_vehicles)]
    if not any(v.vt == 1 for v in fleet):
        fleet[0] = replace(fleet[0], vt=1)
    return Instance(
        name=name,
        orders=tuple(orders),
        fleet=tuple(fleet),
        travel=travel_matrix_from_coords(coords),
        coords=tuple(coords),
    )


def random_subproblem(rng: random.Random, m: int, *, filtered=True,
                      window_rate=0.4) -> FilteredSubproblem:
    """A standalone subproblem over a fresh random instance.

    ``filtered=True`` applies order filtering (so the mobility invariant
    holds); otherwise all orders are kept, as in constraint mode.
    """
    inst = random_instance(rng, m, n_vehicles=1, window_rate=window_rate)
    vehicle = inst.fleet[0]
    if filtered:
        sub = order_filtering(inst.orders, vehicle, inst.travel)
        if not sub.orders:  # ensure at least one order survives
            vehicle = replace(vehicle, vt=1)
            sub = order_filtering(inst.orders, vehicle, inst.travel)
        return sub
    return build_subproblem(inst.orders, vehicle, inst.travel)


# ---------------------------------------------------------------------------
# vectorized model evaluation for large assignment batches


def model_arrays(model):
    index = {v: i for i, v in enumerate(model.variables)}
    rows = []
    for c in model.constraints:
        lin = np.zeros(len(index))
        for var, coeff in c.linear.items():
            lin[index[var]] += coeff
        quad = [(index[a], index[b], coeff) for (a, b), coeff in c.quadratic.items()]
        rows.append((lin, quad, c.sense, c.rhs))
    return rows


def batch_feasible(model, assignments: np.ndarray) -> np.ndarray:
    """Constraint satisfaction for each 0/1 assignment row, straight from the
    stored coefficients."""
    Z = assignments.astype(float)
    ok = np.ones(len(Z), dtype=bool)
    for lin, quad, sense, rhs in model_arrays(model):
        values = Z @ lin
        for a, b, coeff in quad:
            values = values + coeff * (Z[:, a] * Z[:, b])
        if sense == "<=":
            ok &= values <= rhs + SLACK
        elif sense == ">=":
            ok &= values >= rhs - SLACK
        else:
            ok &= np.abs(values - rhs) <= SLACK
    return ok


def exhaustive_assignments(m: int) -> np.ndarray:
    """All 2^(m*m) assignments as rows (variable order matches the model's)."""
    n = m * m
    codes = np.arange(2 ** n, dtype=np.int64)
    return ((codes[:, None] >> np.arange(n)) & 1).astype(np.int8)


def sampled_assignments(rng: random.Random, m: int, count: int) -> np.ndarray:
    """A mix of uniform-random bits, valid sequences, and near-valid corruptions."""
    n = m * m
    rows = np.zeros((count, n), dtype=np.int8)
    for r in range(count):
        style = r % 3
        if style == 0:
            for idx in range(n):
                rows[r, idx] = rng.random() < 0.3
        else:
            k = rng.randrange(m + 1)
            seq = rng.sample(range(m), k)
            for p, i in enumerate(seq):
                rows[r, i * m + p] = 1
            if style == 2:
                for _ in range(rng.randrange(1, 3)):
                    rows[r, rng.randrange(n)] ^= 1
    return rows


def row_to_assignment(model, row) -> dict[str, int]:
    return {var: int(row[idx]) for idx, var in enumerate(model.variables)}
