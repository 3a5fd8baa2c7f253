"""Sharp partial-identification bounds on long mean treatment outcomes
from published randomized-trial binary-subgroup summaries."""

from .errors import (
    DegenerateSample,
    EmptyOracle,
    InfeasibleInput,
    InvalidAssumption,
    InvalidDimension,
    LongBoundsError,
    NumericalFailure,
    ParseError,
    RouteError,
    ShapeError,
    SolverFailure,
    StudyFailure,
    UnknownArm,
    ValidationError,
)
from .model import (
    ArmSummary,
    Assumption,
    AssumptionForm,
    CellIndex,
    ConstraintSystem,
    LongPoint,
    Route,
    TrialSummary,
    adjacent_cell_pairs,
    bounded_variation_family,
    build_system,
    classify_route,
    enumerate_cells,
    implied_overall_means,
    max_violation,
    residuals,
)
from .lp import (
    BoundStatus,
    CellBounds,
    ReparamSystem,
    cell_mean_bounds,
    contrast_bounds,
    membership,
    reparameterize,
)
from .nlp import (
    EndpointReport,
    LocalResult,
    SolverConfig,
    Target,
    local_solve,
    multistart_bound,
    sample_starts,
)
from .oracle import OracleBudget, grid_bounds, sample_feasible
from .mc import (
    BoundsConfig,
    EndpointStats,
    GroundTruth,
    SimulationReport,
    draw_trial,
    exact_trial,
    imprecision_study,
)

__version__ = "0.1.0"

__all__ = [
    "ArmSummary", "Assumption", "AssumptionForm", "BoundStatus",
    "BoundsConfig", "CellBounds", "CellIndex", "ConstraintSystem",
    "DegenerateSample", "EmptyOracle", "EndpointReport", "EndpointStats",
    "GroundTruth", "InfeasibleInput", "InvalidAssumption", "InvalidDimension",
    "LocalResult", "LongBoundsError", "LongPoint", "NumericalFailure",
    "OracleBudget", "ParseError", "ReparamSystem", "Route", "RouteError",
    "ShapeError", "SimulationReport", "SolverConfig", "SolverFailure",
    "StudyFailure", "Target", "TrialSummary", "UnknownArm", "ValidationError",
    "adjacent_cell_pairs", "bounded_variation_family", "build_system",
    "cell_mean_bounds", "classify_route", "contrast_bounds", "draw_trial",
    "enumerate_cells", "exact_trial", "grid_bounds", "implied_overall_means",
    "imprecision_study", "local_solve", "max_violation", "membership",
    "multistart_bound", "reparameterize", "residuals", "sample_feasible",
    "sample_starts",
]
