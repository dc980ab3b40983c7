import math
import os
import random
from dataclasses import replace

import pytest

from fleetroute.model import Order, VehicleSpec, travel_matrix_from_coords
from fleetroute.routemodel import (
    assignment_from_sequence,
    build_route_model,
    build_subproblem,
    decode,
    emit_mobility_constraints,
    model_from_bytes,
)
from fleetroute.solvers import (
    SizeLimitError,
    SolverConfig,
    _SequenceEvaluator,
    solve,
    solve_anneal,
    solve_exact,
    solve_external_stub,
)

from helpers import brute_force_best, random_subproblem, validator_accepts

SLACK = 1e-9


def _decoded_sequence(outcome, sub):
    route = decode(outcome.assignment, sub)
    return route.sequence


def _sub_from(coords, orders, vehicle):
    return build_subproblem(orders, vehicle, travel_matrix_from_coords(coords))


def test_exact_single_order():
    sub = _sub_from([(0, 0), (3, 4)], [Order(id="only", node=1, wd=5, dd=5)],
                    VehicleSpec(id="t", W=10, D=10))
    model = build_route_model(sub)
    out = solve_exact(model, sub)
    assert out.feasible
    assert _decoded_sequence(out, sub) == ("only",)
    assert out.objective == pytest.approx(10.0 - model.serve_reward)


def test_exact_serves_all_when_unconstrained():
    coords = [(0, 0), (10, 0), (10, 10), (0, 10)]
    orders = [Order(id=f"o{k}", node=k, wd=1, dd=1) for k in (1, 2, 3)]
    sub = _sub_from(coords, orders, VehicleSpec(id="t", W=50, D=50))
    model = build_route_model(sub)
    out = solve_exact(model, sub)
    assert len(_decoded_sequence(out, sub)) == 3
    # shortest tour over the square corners is 40
    route = decode(out.assignment, sub)
    assert route.distance == pytest.approx(40.0)


def test_exact_windows_force_unique_order():
    # both orders fit only if the far one is visited first
    coords = [(0, 0), (10, 0), (20, 0)]
    orders = [Order(id="near", node=1, wd=1, dd=1, lt=30, ut=35),
              Order(id="far", node=2, wd=1, dd=1, lt=0, ut=25)]
    sub = _sub_from(coords, orders, VehicleSpec(id="t", W=10, D=10))
    model = build_route_model(sub)
    out = solve_exact(model, sub)
    assert _decoded_sequence(out, sub) == ("far", "near")  # 20, then 30


def test_exact_refuses_above_cap():
    rng = random.Random(0)
    sub = random_subproblem(rng, 5)
    model = build_route_model(sub)
    with pytest.raises(SizeLimitError):
        solve_exact(model, sub, SolverConfig(exact_cap=4))


def test_exact_agrees_with_naive_brute_force():
    rng = random.Random(101)
    for trial in range(24):
        m = rng.randrange(1, 6)
        sub = random_subproblem(rng, m, window_rate=0.5)
        model = build_route_model(sub)
        out = solve_exact(model, sub)
        best = brute_force_best(model, sub)
        assert out.feasible
        assert out.objective == pytest.approx(best[0], abs=1e-9)


def test_exact_agreement_in_constraint_mode():
    rng = random.Random(55)
    for trial in range(8):
        sub = random_subproblem(rng, 4, filtered=False)
        vt = rng.choice([1, 2, 3])
        model = build_route_model(sub)
        emit_mobility_constraints(model, sub, vt)
        out = solve_exact(model, sub)
        best = brute_force_best(model, sub)
        assert out.objective == pytest.approx(best[0], abs=1e-9)
        banned = {o.id for o in sub.orders if vt > o.ot}
        assert not banned & set(_decoded_sequence(out, sub))


def test_anneal_returns_empty_when_nothing_fits():
    sub = _sub_from([(0, 0), (5, 5)], [Order(id="fat", node=1, wd=99, dd=99)],
                    VehicleSpec(id="t", W=10, D=10))
    model = build_route_model(sub)
    out = solve_anneal(model, sub, SolverConfig(restarts=3, sweeps=200))
    assert out.feasible
    assert _decoded_sequence(out, sub) == ()
    assert out.objective == 0.0


def test_anneal_deterministic_for_fixed_seed():
    rng = random.Random(9)
    sub = random_subproblem(rng, 6, window_rate=0.3)
    model = build_route_model(sub)
    config = SolverConfig(seed=42, restarts=4, sweeps=400)
    a = solve_anneal(model, sub, config)
    b = solve_anneal(model, sub, config)
    assert a.assignment == b.assignment
    assert a.objective == b.objective
    assert a.evaluations == b.evaluations
    assert a.best_trace == b.best_trace
    c = solve_anneal(model, sub, replace(config, seed=43))
    assert c.evaluations == a.evaluations  # same schedule, different walk


def test_anneal_thread_count_does_not_change_result():
    rng = random.Random(19)
    sub = random_subproblem(rng, 6, window_rate=0.3)
    model = build_route_model(sub)
    one = solve_anneal(model, sub, SolverConfig(seed=5, restarts=6, sweeps=300, threads=1))
    four = solve_anneal(model, sub, SolverConfig(seed=5, restarts=6, sweeps=300, threads=4))
    assert one.assignment == four.assignment
    assert one.objective == four.objective


def test_anneal_best_trace_is_monotone():
    rng = random.Random(29)
    sub = random_subproblem(rng, 7, window_rate=0.4)
    model = build_route_model(sub)
    out = solve_anneal(model, sub, SolverConfig(seed=1))
    energies = [e for _, e in out.best_trace]
    assert energies == sorted(energies, reverse=True)
    evaluations = [n for n, _ in out.best_trace]
    assert evaluations == sorted(evaluations)


def test_anneal_near_exact_on_small_subproblems():
    rng = random.Random(77)
    hits = 0
    trials = 10
    for seed in range(trials):
        sub = random_subproblem(rng, 6, window_rate=0.3)
        model = build_route_model(sub)
        exact = solve_exact(model, sub)
        anneal = solve_anneal(model, sub, SolverConfig(seed=seed, restarts=8, sweeps=800))
        assert anneal.feasible
        gap = (anneal.objective - exact.objective) / max(abs(exact.objective), 1e-12)
        if gap <= 0.05:
            hits += 1
    assert hits >= trials - 1


def test_energy_soundness_matches_validator():
    # zero penalty iff the validator accepts the decoded sequence
    rng = random.Random(31)
    for trial in range(20):
        m = rng.randrange(1, 7)
        sub = random_subproblem(rng, m, window_rate=0.6)
        model = build_route_model(sub)
        ev = _SequenceEvaluator(model, sub, penalty_weight=model.serve_reward)
        k = rng.randrange(m + 1)
        seq = rng.sample(range(m), k)
        _, _, vmax = ev.evaluate(seq)
        assignment = assignment_from_sequence(m, seq)
        assert (vmax <= SLACK) == validator_accepts(sub, assignment)
        # the fast path must agree with the generic model arithmetic
        model_vmax = max(model.violations(assignment).values(), default=0.0)
        assert vmax == pytest.approx(model_vmax, abs=1e-9)


def test_external_stub_writes_deterministic_model(tmp_path):
    rng = random.Random(3)
    sub = random_subproblem(rng, 4, window_rate=0.5)
    model = build_route_model(sub)
    path = tmp_path / "model.json"
    config = SolverConfig(backend="external-stub", stub_path=str(path))
    out = solve_external_stub(model, sub, config)
    assert out.status == "external-not-available"
    assert out.feasible  # the all-zero assignment satisfies every constraint
    assert _decoded_sequence(out, sub) == ()
    first = path.read_bytes()
    solve_external_stub(model, sub, config)
    assert path.read_bytes() == first
    parsed = model_from_bytes(first)
    assert parsed == model
    assert len(parsed.variables) == 16


def test_external_stub_env_var_path(tmp_path, monkeypatch):
    rng = random.Random(4)
    sub = random_subproblem(rng, 2)
    model = build_route_model(sub)
    path = tmp_path / "env-model.json"
    monkeypatch.setenv("FLEETROUTE_STUB_PATH", str(path))
    solve_external_stub(model, sub, SolverConfig())
    assert path.exists()


def test_external_stub_requires_path(monkeypatch):
    monkeypatch.delenv("FLEETROUTE_STUB_PATH", raising=False)
    rng = random.Random(4)
    sub = random_subproblem(rng, 2)
    model = build_route_model(sub)
    with pytest.raises(ValueError):
        solve_external_stub(model, sub, SolverConfig())


def test_external_stub_write_failure(tmp_path):
    rng = random.Random(4)
    sub = random_subproblem(rng, 2)
    model = build_route_model(sub)
    config = SolverConfig(stub_path=str(tmp_path / "missing-dir" / "model.json"))
    with pytest.raises(OSError):
        solve_external_stub(model, sub, config)


def test_auto_dispatch_picks_backend_by_size():
    rng = random.Random(8)
    small = random_subproblem(rng, 3)
    out = solve(build_route_model(small), small, SolverConfig(backend="auto"))
    assert out.backend == "exact"
    big = random_subproblem(rng, 9, window_rate=0.0)
    out = solve(build_route_model(big), big,
                SolverConfig(backend="auto", restarts=3, sweeps=200))
    assert out.backend == "anneal"


def test_config_invariants():
    with pytest.raises(ValueError):
        SolverConfig(backend="quantum")
    with pytest.raises(ValueError):
        SolverConfig(time_limit=0)
    with pytest.raises(ValueError):
        SolverConfig(sweeps=0)
    with pytest.raises(ValueError):
        SolverConfig(t_initial=1e-6, t_final=1.0)
    with pytest.raises(ValueError):
        SolverConfig(threads=0)


def test_outcome_feasible_flag_tracks_violations():
    rng = random.Random(13)
    sub = random_subproblem(rng, 4, window_rate=0.5)
    model = build_route_model(sub)
    out = solve_exact(model, sub)
    assert out.feasible == all(v <= SLACK for v in out.violations.values())
