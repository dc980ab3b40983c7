"""Backends that solve a single-route quadratic model.

Three backends share one outcome shape: an exact dynamic program used as the
desk-scale oracle, a penalty-method simulated annealer that searches in
sequence space, and a stub that serializes the model for an external hybrid
solver seam. The exact and anneal backends understand the constraint families
emitted by :mod:`fleetroute.routemodel` (structure, capacity, windows,
duration, mobility).
"""

from __future__ import annotations

import math
import os
import random
import time as _time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .routemodel import (
    SLACK_TOL,
    FilteredSubproblem,
    QuadraticModel,
    assignment_from_sequence,
    model_to_bytes,
)

EXTERNAL_STUB_PATH_ENV = "FLEETROUTE_STUB_PATH"


class SizeLimitError(ValueError):
    """Raised when a subproblem is too large for exact enumeration."""


@dataclass(frozen=True)
class SolverConfig:
    backend: str = "auto"
    time_limit: float = 5.0
    seed: int = 7
    sweeps: int = 2000
    restarts: int = 20
    t_initial: float | None = None
    t_final: float = 1e-3
    penalty_weight: float | None = None
    penalty_growth: float = 1.0
    exact_cap: int = 12
    auto_exact_max: int = 8
    threads: int = 1
    stub_path: str | None = None

    def __post_init__(self):
        if self.backend not in ("auto", "exact", "anneal", "external-stub"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if not self.time_limit > 0:
            raise ValueError("time_limit must be positive")
        if self.sweeps < 1 or self.restarts < 1:
            raise ValueError("sweeps and restarts must be >= 1")
        if self.t_final <= 0:
            raise ValueError("t_final must be positive")
        if self.t_initial is not None and not self.t_initial > self.t_final:
            raise ValueError("temperatures must be positive and decreasing")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


@dataclass(frozen=True)
class SolveOutcome:
    assignment: dict[str, int]
    feasible: bool
    objective: float
    evaluations: int = 0
    wall_time: float = 0.0
    violations: dict[str, float] = field(default_factory=dict)
    backend: str = "exact"
    status: str = "ok"
    best_trace: tuple[tuple[int, float], ...] = ()


def _outcome(model: QuadraticModel, sequence, sub: FilteredSubproblem, *,
             backend: str, evaluations: int, wall_time: float,
             status: str = "ok", best_trace=()) -> SolveOutcome:
    assignment = assignment_from_sequence(len(sub.orders), sequence)
    violations = model.violations(assignment)
    feasible = all(v <= SLACK_TOL for v in violations.values())
    return SolveOutcome(
        assignment=assignment,
        feasible=feasible,
        objective=model.objective_value(assignment),
        evaluations=evaluations,
        wall_time=wall_time,
        violations=violations,
        backend=backend,
        status=status,
        best_trace=tuple(best_trace),
    )


def _banned_orders(model: QuadraticModel) -> tuple[set[int], bool]:
    """Indices forbidden by mobility constraints, and whether any were emitted."""
    banned: set[int] = set()
    saw = False
    for c in model.constraints:
        if c.label.startswith("mobility["):
            saw = True
            if c.rhs < 0.5:
                banned.add(int(c.label[9:-1]))
    return banned, saw


def _coeff_scale(model: QuadraticModel) -> float:
    scale = 0.0
    for c in model.objective_linear.values():
        scale = max(scale, abs(c))
    for c in model.objective_quadratic.values():
        scale = max(scale, abs(c))
    return scale if scale > 0 else 1.0


class _SequenceEvaluator:
    """Fast feasibility/energy arithmetic over stop sequences.

    Computes exactly the constraint values the model would report on the
    corresponding assignment (the agreement is pinned by tests), at O(route
    length) per call instead of touching every model coefficient.
    """

    def __init__(self, model: QuadraticModel, sub: FilteredSubproblem,
                 penalty_weight: float):
        self.m = len(sub.orders)
        self.time = sub.travel.time.tolist()
        self.dist = sub.travel.dist.tolist()
        self.wd = [o.wd for o in sub.orders]
        self.dd = [o.dd for o in sub.orders]
        self.wp = [o.wp for o in sub.orders]
        self.dp = [o.dp for o in sub.orders]
        self.lt = list(sub.lt_vec)
        self.ut = list(sub.ut_vec)
        self.W = sub.vehicle.W
        self.D = sub.vehicle.D
        self.rt = sub.vehicle.rt
        self.reward = model.serve_reward if model.serve_reward is not None else _coeff_scale(model)
        self.penalty = penalty_weight
        self.banned, self.mobility_on = _banned_orders(model)

    def evaluate(self, seq, penalty: float | None = None) -> tuple[float, float, float]:
        """Returns (energy, objective, max constraint violation)."""
        if penalty is None:
            penalty = self.penalty
        m = self.m
        k = len(seq)
        time, dist = self.time, self.dist
        pen2 = 0.0
        vmax = 0.0

        arrivals = []
        t = d = 0.0
        prev = 0
        for i in seq:
            t += time[prev][i + 1]
            d += dist[prev][i + 1]
            arrivals.append(t)
            prev = i + 1
        duration = t + time[prev][0]
        total_dist = d + dist[prev][0]
        if k == 0:
            duration = total_dist = 0.0
        objective = total_dist - self.reward * k

        dep_w = dep_d = 0.0
        for i in seq:
            dep_w += self.wd[i]
            dep_d += self.dd[i]
        v = dep_w - self.W
        if v > 0:
            pen2 += v * v
            vmax = max(vmax, v)
        v = dep_d - self.D
        if v > 0:
            pen2 += v * v
            vmax = max(vmax, v)

        w, dm = dep_w, dep_d
        last_w = last_d = 0.0
        for i in seq:
            w = w - self.wd[i] + self.wp[i]
            dm = dm - self.dd[i] + self.dp[i]
            v = w - self.W
            if v > 0:
                pen2 += v * v
                vmax = max(vmax, v)
            v = dm - self.D
            if v > 0:
                pen2 += v * v
                vmax = max(vmax, v)
            last_w, last_d = w, dm
        # slots past the route's end all see the final (all-pickups) load
        if m > k:
            v = last_w - self.W
            if v > 0:
                pen2 += (m - k) * v * v
                vmax = max(vmax, v)
            v = last_d - self.D
            if v > 0:
                pen2 += (m - k) * v * v
                vmax = max(vmax, v)

        for p, i in enumerate(seq):
            a = arrivals[p]
            lt = self.lt[i]
            if lt > 0 and a < lt:
                v = lt - a
                pen2 += v * v
                vmax = max(vmax, v)
            ut = self.ut[i]
            if a > ut:
                v = a - ut
                pen2 += v * v
                vmax = max(vmax, v)

        if math.isfinite(self.rt):
            v = duration - self.rt
            if v > 0:
                pen2 += v * v
                vmax = max(vmax, v)

        if self.mobility_on:
            for i in seq:
                if i in self.banned:
                    pen2 += 1.0
                    vmax = max(vmax, 1.0)

        return objective + penalty * pen2, objective, vmax


# ---------------------------------------------------------------------------
# exact backend


def solve_exact(model: QuadraticModel, sub: FilteredSubproblem,
                config: SolverConfig | None = None) -> SolveOutcome:
    """Global optimum over every ordered subset of orders.

    A label-setting dynamic program over (visited set, last stop) states walks
    the same search space as naive enumeration of all ordered subsets, pruning
    only provably dominated partial routes, so the returned optimum is exact.
    Ties break toward the lexicographically smallest order-id sequence (with
    the empty route smallest), which keeps the result identical whether
    mobility is handled by filtering or by constraints.
    """
    config = config or SolverConfig()
    started = _time.monotonic()
    m = len(sub.orders)
    if m > config.exact_cap:
        raise SizeLimitError(f"subproblem has {m} orders; exact cap is {config.exact_cap}")

    banned, _ = _banned_orders(model)
    candidates = [i for i in range(m) if i not in banned]
    has_windows = any(
        sub.lt_vec[i] > 0 or math.isfinite(sub.ut_vec[i]) for i in candidates)
    time = sub.travel.time.tolist()
    dist = sub.travel.dist.tolist()
    wd = [o.wd for o in sub.orders]
    dd = [o.dd for o in sub.orders]
    wp = [o.wp for o in sub.orders]
    dp = [o.dp for o in sub.orders]
    lt = list(sub.lt_vec)
    ut = list(sub.ut_vec)
    W, D, rt = sub.vehicle.W, sub.vehicle.D, sub.vehicle.rt
    rt_bounded = math.isfinite(rt)
    reward = model.serve_reward if model.serve_reward is not None else _coeff_scale(model)
    tol = SLACK_TOL

    # label: (t, d, mw, md, net_w, net_d, wd_sum, dd_sum, j, parent_label)
    best_obj = 0.0
    best_seq: tuple[int, ...] = ()
    best_ids: tuple[str, ...] = ()
    evaluations = 0

    def walk(label) -> list[int]:
        seq = []
        while label is not None:
            seq.append(label[8])
            label = label[9]
        seq.reverse()
        return seq

    def consider(label, size: int):
        nonlocal best_obj, best_seq, best_ids
        j = label[8]
        if rt_bounded and label[0] + time[j + 1][0] > rt + tol:
            return
        obj = label[1] + dist[j + 1][0] - reward * size
        if obj < best_obj - 1e-12:
            seq = walk(label)
            best_obj = obj
            best_seq = tuple(seq)
            best_ids = tuple(sub.orders[i].id for i in seq)
        elif obj <= best_obj + 1e-12:
            seq = walk(label)
            ids = tuple(sub.orders[i].id for i in seq)
            if best_ids and ids < best_ids:
                best_obj = min(best_obj, obj)
                best_seq = tuple(seq)
                best_ids = ids

    def dominated(a, b) -> bool:
        """True when ``b`` is at least as good as ``a`` for any completion."""
        if has_windows:
            if a[0] != b[0]:
                return False
        elif b[0] > a[0]:
            return False
        return b[1] <= a[1] and b[2] <= a[2] and b[3] <= a[3]

    def insert(state_labels: list, label) -> None:
        kept = []
        for other in state_labels:
            if dominated(label, other):
                return
            if not dominated(other, label):
                kept.append(other)
        kept.append(label)
        state_labels[:] = kept

    frontier: dict[tuple[int, int], list] = {}
    for i in candidates:
        t = time[0][i + 1]
        if lt[i] > 0 and t < lt[i] - tol:
            continue
        if t > ut[i] + tol:
            continue
        if rt_bounded and t > rt + tol:
            continue
        net_w = wp[i] - wd[i]
        net_d = dp[i] - dd[i]
        mw = net_w if net_w > 0 else 0.0
        md = net_d if net_d > 0 else 0.0
        if wd[i] + mw > W + tol or dd[i] + md > D + tol:
            continue
        label = (t, dist[0][i + 1], mw, md, net_w, net_d, wd[i], dd[i], i, None)
        evaluations += 1
        consider(label, 1)
        insert(frontier.setdefault((1 << i, i), []), label)

    size = 1
    while frontier:
        size += 1
        next_frontier: dict[tuple[int, int], list] = {}
        for (mask, j), labels in frontier.items():
            for label in labels:
                t0, d0, mw0, md0, nw0, nd0, wsum0, dsum0 = label[:8]
                row_t = time[j + 1]
                row_d = dist[j + 1]
                for i in candidates:
                    bit = 1 << i
                    if mask & bit:
                        continue
                    t = t0 + row_t[i + 1]
                    if lt[i] > 0 and t < lt[i] - tol:
                        continue
                    if t > ut[i] + tol:
                        continue
                    if rt_bounded and t > rt + tol:
                        continue
                    net_w = nw0 + wp[i] - wd[i]
                    net_d = nd0 + dp[i] - dd[i]
                    mw = mw0 if mw0 >= net_w else net_w
                    md = md0 if md0 >= net_d else net_d
                    wsum = wsum0 + wd[i]
                    dsum = dsum0 + dd[i]
                    if wsum + mw > W + tol or dsum + md > D + tol:
                        continue
                    new = (t, d0 + row_d[i + 1], mw, md,
                           net_w, net_d, wsum, dsum, i, label)
                    evaluations += 1
                    consider(new, size)
                    insert(next_frontier.setdefault((mask | bit, i), []), new)
        frontier = next_frontier

    return _outcome(model, best_seq, sub, backend="exact",
                    evaluations=evaluations,
                    wall_time=_time.monotonic() - started)


# ---------------------------------------------------------------------------
# anneal backend


def _propose(rng: random.Random, seq: list[int], served: set[int], candidates: list[int]):
    k = len(seq)
    options = []
    if len(served) < len(candidates):
        options.append(("insert", 0.4))
    if k:
        options.append(("remove", 0.15))
    if k >= 2:
        options.append(("swap", 0.225))
        options.append(("relocate", 0.225))
    if not options:
        return None
    r = rng.random() * sum(w for _, w in options)
    move = options[-1][0]
    for name, w in options:
        r -= w
        if r <= 0:
            move = name
            break
    new = list(seq)
    if move == "insert":
        unserved = [i for i in candidates if i not in served]
        new.insert(rng.randrange(k + 1), unserved[rng.randrange(len(unserved))])
    elif move == "remove":
        del new[rng.randrange(k)]
    elif move == "swap":
        a, b = rng.randrange(k), rng.randrange(k)
        new[a], new[b] = new[b], new[a]
    else:
        i = new.pop(rng.randrange(k))
        new.insert(rng.randrange(k), i)
    return new


def _run_restart(ev: _SequenceEvaluator, config: SolverConfig, restart: int,
                 t0: float, deadline: float):
    rng = random.Random(config.seed * 1000003 + restart)
    candidates = [i for i in range(ev.m) if i not in ev.banned] if ev.mobility_on \
        else list(range(ev.m))
    seq: list[int] = []
    served: set[int] = set()
    energy, objective, vmax = ev.evaluate(seq)
    evaluations = 1
    best = (energy, tuple(seq))
    best_feasible = (objective, tuple(seq)) if vmax <= SLACK_TOL else None
    trace = [(1, energy)]
    sweeps = config.sweeps
    ratio = config.t_final / t0
    grow = config.penalty_growth
    timed_out = False
    for s in range(sweeps):
        if s % 128 == 0 and _time.monotonic() > deadline:
            timed_out = True
            break
        progress = s / (sweeps - 1) if sweeps > 1 else 1.0
        temp = t0 * ratio ** progress
        weight = None if grow == 1.0 else ev.penalty * grow ** progress
        proposal = _propose(rng, seq, served, candidates)
        if proposal is None:
            break
        e2, o2, v2 = ev.evaluate(proposal, weight)
        evaluations += 1
        if e2 < best[0]:
            best = (e2, tuple(proposal))
            trace.append((evaluations, e2))
        if v2 <= SLACK_TOL and (best_feasible is None or o2 < best_feasible[0]):
            best_feasible = (o2, tuple(proposal))
        if e2 <= energy or rng.random() < math.exp((energy - e2) / temp):
            seq, energy = proposal, e2
            served = set(seq)
    return best, best_feasible, evaluations, trace, timed_out


def solve_anneal(model: QuadraticModel, sub: FilteredSubproblem,
                 config: SolverConfig | None = None) -> SolveOutcome:
    """Penalty-method simulated annealing over stop sequences.

    Structure constraints hold by construction; capacity/time/duration and
    mobility violations enter the energy as squared penalties weighted on the
    scale of the serve reward. Multi-restart geometric cooling, deterministic
    for a fixed seed (when the schedule finishes inside the time limit, which
    is a hard wall).
    """
    config = config or SolverConfig()
    started = _time.monotonic()
    deadline = started + config.time_limit
    reward = model.serve_reward if model.serve_reward is not None else _coeff_scale(model)
    penalty = config.penalty_weight if config.penalty_weight is not None else reward
    t0 = config.t_initial if config.t_initial is not None else max(2.0 * reward, 2.0 * config.t_final)
    ev = _SequenceEvaluator(model, sub, penalty)

    runs = list(range(config.restarts))
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(
                lambda r: _run_restart(ev, config, r, t0, deadline), runs))
    else:
        results = [_run_restart(ev, config, r, t0, deadline) for r in runs]

    # merge is associative and order-independent: strict improvement only,
    # so the lowest restart index wins ties
    best_energy = math.inf
    best_energy_seq: tuple[int, ...] = ()
    best_feasible = None
    evaluations = 0
    trace: list[tuple[int, float]] = []
    status = "ok"
    for best, feas, evals, run_trace, timed_out in results:
        for local_evals, energy in run_trace:
            if not trace or energy < trace[-1][1]:
                trace.append((evaluations + local_evals, energy))
        if best[0] < best_energy:
            best_energy, best_energy_seq = best
        if feas is not None and (best_feasible is None or feas[0] < best_feasible[0]):
            best_feasible = feas
        evaluations += evals
        if timed_out:
            status = "time-limit"
    chosen = best_feasible[1] if best_feasible is not None else best_energy_seq
    return _outcome(model, chosen, sub, backend="anneal",
                    evaluations=evaluations,
                    wall_time=_time.monotonic() - started,
                    status=status, best_trace=trace)


# ---------------------------------------------------------------------------
# external stub


def solve_external_stub(model: QuadraticModel, sub: FilteredSubproblem,
                        config: SolverConfig | None = None) -> SolveOutcome:
    """Serialize the model for the external hybrid-solver seam and report that
    no external result is available."""
    config = config or SolverConfig()
    started = _time.monotonic()
    path = config.stub_path or os.environ.get(EXTERNAL_STUB_PATH_ENV)
    if not path:
        raise ValueError(
            "external-stub backend needs an output path "
            f"(SolverConfig.stub_path or ${EXTERNAL_STUB_PATH_ENV})")
    with open(path, "wb") as fh:
        fh.write(model_to_bytes(model))
    return _outcome(model, (), sub, backend="external-stub",
                    evaluations=0, wall_time=_time.monotonic() - started,
                    status="external-not-available")


def solve(model: QuadraticModel, sub: FilteredSubproblem,
          config: SolverConfig | None = None) -> SolveOutcome:
    """Dispatch on the configured backend; ``auto`` uses exact for small
    subproblems and annealing otherwise."""
    config = config or SolverConfig()
    backend = config.backend
    if backend == "auto":
        m = len(sub.orders)
        backend = "exact" if m <= min(config.auto_exact_max, config.exact_cap) else "anneal"
    if backend == "exact":
        return solve_exact(model, sub, config)
    if backend == "anneal":
        return solve_anneal(model, sub, config)
    return solve_external_stub(model, sub, config)
