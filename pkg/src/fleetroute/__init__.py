"""Heterogeneous-fleet route planning with simultaneous pickup and delivery,
time windows, and zone-based vehicle restrictions.

Routes are built one at a time: each round a vehicle is chosen, the orders it
can reach become a constrained quadratic model over position variables, a
backend solves it, and the decoded route is committed. An independent
validator recomputes every rule from raw data and is the ground truth the
models and solvers are tested against.
"""

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
from .routemodel import (
    EmptySubproblemError,
    FilteredSubproblem,
    ObjectiveWeights,
    QuadraticModel,
    StructuralViolation,
    assignment_from_sequence,
    build_route_model,
    build_subproblem,
    decode,
    emit_mobility_constraints,
    model_from_bytes,
    model_to_bytes,
)
from .solvers import (
    SizeLimitError,
    SolveOutcome,
    SolverConfig,
    solve,
    solve_anneal,
    solve_exact,
    solve_external_stub,
)
from .planner import (
    EquivalenceReport,
    OrchestratorConfig,
    mobility_mode_equivalence_check,
    order_filtering,
    plan,
    select_vehicle,
)
from .validate import ValidationReport, Violation, route_loads, route_timeline, validate_plan
from .storage import FormatError, load_instance, load_plan, save_instance, save_plan
from .fixtures import FIXTURE_NAMES, generate_fixture
from .svg import render_svg

__version__ = "0.1.0"
