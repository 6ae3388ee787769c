"""Bregman and metric projections in l^n_q, alternating projection methods
and sampled regularity constants for pairs of subspaces."""

from .errors import (
    ConfigParseError,
    DegenerateBasis,
    DimensionMismatch,
    InsufficientDecay,
    LqBregmanError,
    NonConvergence,
    NumericalConsistencyError,
    OracleRankTooHigh,
    PointInIntersection,
    SolverDivergence,
)
from .space import (
    SpaceConfig,
    bregman_distance,
    duality_map,
    duality_map_inverse,
    gauge_value,
    norm,
    three_point_gap,
)
from .subspaces import Subspace, annihilator, contains, intersect, same_span, subspace_sum
from .projections import (
    ProjectionResult,
    SolverOptions,
    bregman_distance_to,
    bregman_project,
    bregman_project_batch,
    brute_force_project_oracle,
    metric_distance,
    metric_project_batch,
    metric_project_direct,
    metric_project_via_duality,
)
from .alternating import (
    IterationTrace,
    RateEstimate,
    StopRule,
    alternate_bregman,
    alternate_residual_cyclic,
    alternate_residual_metric,
    check_bregman_monotone,
    estimate_linear_rate,
)
from .regularity import (
    RegularityReport,
    dual_regularity_check,
    estimate_kappa,
    metric_regularity_ratio,
    regularity_ratio,
)
from .harness import (
    ExampleReport,
    ExperimentConfig,
    load_config,
    parse_config,
    power_type_probe,
    run_example1,
    run_example2,
    run_experiment,
)

__version__ = "0.1.0"
