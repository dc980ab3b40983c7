"""Core domain types: orders, vehicles, travel matrices, routes and plans."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

INFINITE = math.inf

OWNED = "owned"
RENTABLE = "rentable"


class InvalidInstanceError(ValueError):
    """Raised when an instance fails its sanity checks."""

    def __init__(self, violations: list[str]):
        super().__init__("invalid instance: " + "; ".join(violations))
        self.violations = violations


@dataclass(frozen=True)
class Order:
    """One customer request: loads to deliver/pick up, a time window and a zone type.

    ``ut`` may be ``math.inf`` for an open-ended window; ``lt`` defaults to 0.
    ``ot`` is the zone type: a vehicle of type ``vt`` may serve the order only
    when ``vt <= ot``.
    """

    id: str
    node: int
    wd: float = 0.0
    dd: float = 0.0
    wp: float = 0.0
    dp: float = 0.0
    lt: float = 0.0
    ut: float = INFINITE
    ot: int = 1

    @property
    def windowed(self) -> bool:
        return self.lt > 0 or math.isfinite(self.ut)


@dataclass(frozen=True)
class VehicleSpec:
    """A truck: weight/dimension capacities, type, route-duration cap and ownership."""

    id: str
    W: float
    D: float
    vt: int = 1
    rt: float = INFINITE
    ownership: str = OWNED
    max_uses: int = 1


@dataclass(frozen=True, eq=False)
class TravelMatrix:
    """Travel times and distances between nodes; node 0 is the depot."""

    time: np.ndarray
    dist: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, TravelMatrix):
            return NotImplemented
        return np.array_equal(self.time, other.time) and np.array_equal(self.dist, other.dist)

    def __post_init__(self):
        time = np.asarray(self.time, dtype=float)
        dist = np.asarray(self.dist, dtype=float)
        object.__setattr__(self, "time", time)
        object.__setattr__(self, "dist", dist)
        time.setflags(write=False)
        dist.setflags(write=False)

    @property
    def n(self) -> int:
        return self.time.shape[0]

    def restrict(self, nodes: list[int]) -> "TravelMatrix":
        """Submatrix over the given node indices, in the given order."""
        idx = np.asarray(nodes, dtype=int)
        return TravelMatrix(self.time[np.ix_(idx, idx)], self.dist[np.ix_(idx, idx)])


@dataclass(frozen=True)
class Instance:
    """A whole problem: depot + orders + fleet + travel matrices."""

    name: str
    orders: tuple[Order, ...]
    fleet: tuple[VehicleSpec, ...]
    travel: TravelMatrix
    coords: tuple[tuple[float, float], ...] | None = None

    def order_by_id(self, order_id: str) -> Order | None:
        for o in self.orders:
            if o.id == order_id:
                return o
        return None

    def vehicle_by_id(self, vehicle_id: str) -> VehicleSpec | None:
        for v in self.fleet:
            if v.id == vehicle_id:
                return v
        return None


@dataclass(frozen=True)
class Route:
    """One vehicle run: depot -> stops -> depot, with derived trajectories."""

    vehicle: str
    sequence: tuple[str, ...]
    arrivals: tuple[float, ...] = ()
    duration: float = 0.0
    distance: float = 0.0
    depart_weight: float = 0.0
    depart_dim: float = 0.0
    weight_after: tuple[float, ...] = ()
    dim_after: tuple[float, ...] = ()


@dataclass(frozen=True)
class Plan:
    """Committed routes plus any orders left unserved."""

    routes: tuple[Route, ...] = ()
    unserved: tuple[str, ...] = ()
    total_distance: float = 0.0
    total_duration: float = 0.0

    @property
    def served(self) -> tuple[str, ...]:
        return tuple(oid for r in self.routes for oid in r.sequence)


def travel_matrix_from_coords(coords, speed: float = 1.0) -> TravelMatrix:
    """Euclidean distance matrix over planar points; times are dist/speed."""
    pts = np.asarray(coords, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
        raise ValueError("coords must be a non-empty list of planar points")
    if not np.all(np.isfinite(pts)):
        raise ValueError("coords must be finite")
    if not (speed > 0):
        raise ValueError("speed must be positive")
    delta = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt((delta ** 2).sum(axis=2))
    return TravelMatrix(dist / speed, dist)


def check_instance(instance: Instance) -> list[str]:
    """Validate all type invariants; returns human-readable violations (empty = ok)."""
    out: list[str] = []
    travel = instance.travel
    n = travel.n

    if travel.time.shape != travel.dist.shape or travel.time.shape != (n, n):
        out.append("travel: time and dist matrices must be square and same shape")
        return out
    if np.any(np.diag(travel.time) != 0) or np.any(np.diag(travel.dist) != 0):
        out.append("travel: diagonal entries must be 0")
    if np.any(travel.time < 0) or np.any(travel.dist < 0):
        out.append("travel: entries must be non-negative")
    if instance.coords is not None and len(instance.coords) != n:
        out.append("coords: must have one point per node")

    seen_nodes: dict[int, str] = {}
    seen_ids: set[str] = set()
    for o in instance.orders:
        if o.id in seen_ids:
            out.append(f"order {o.id}: duplicate order id")
        seen_ids.add(o.id)
        if not (1 <= o.node <= n - 1):
            out.append(f"order {o.id}: node {o.node} out of range [1, {n - 1}]")
        elif o.node in seen_nodes:
            out.append(f"order {o.id}: duplicate node {o.node} (also used by {seen_nodes[o.node]})")
        else:
            seen_nodes[o.node] = o.id
        if min(o.wd, o.dd, o.wp, o.dp) < 0:
            out.append(f"order {o.id}: loads must be non-negative")
        if o.wd + o.dd <= 0 and o.wp + o.dp <= 0:
            out.append(f"order {o.id}: requests neither delivery nor pickup")
        if math.isfinite(o.ut) and o.lt > o.ut:
            out.append(f"order {o.id}: window inverted (lt={o.lt} > ut={o.ut})")
        if o.lt < 0:
            out.append(f"order {o.id}: lt must be >= 0")
        if o.ot < 1:
            out.append(f"order {o.id}: ot must be >= 1")

    seen_vehicles: set[str] = set()
    for v in instance.fleet:
        if v.id in seen_vehicles:
            out.append(f"vehicle {v.id}: duplicate vehicle id")
        seen_vehicles.add(v.id)
        if v.W <= 0 or v.D <= 0:
            out.append(f"vehicle {v.id}: capacities W, D must be positive")
        if v.vt < 1:
            out.append(f"vehicle {v.id}: vt must be >= 1")
        if v.max_uses < 1:
            out.append(f"vehicle {v.id}: max_uses must be >= 1")
        if v.ownership not in (OWNED, RENTABLE):
            out.append(f"vehicle {v.id}: ownership must be owned or rentable")

    return out
