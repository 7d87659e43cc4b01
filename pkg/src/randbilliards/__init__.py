"""Random billiards driven by a wall microstructure.

A flat wall is replaced by a periodic sawtooth of base angle alpha and the
deterministic reflection in a randomly phased tooth becomes a random map:
from exit angle theta the particle moves to one of four branches

    T1 = theta + 2*alpha          T2 = -theta + 2*pi - 4*alpha
    T3 = theta - 2*alpha          T4 = -theta + 4*alpha

with geometrically derived probabilities.  The package provides the exact
branch tables (``feres``), the symbolic reachable set and its Markov chain
(``reachable``), trajectories, caustics and tangent dynamics on the circular
table (``circle``), measure evolution and the concentration/diffusion
dichotomy (``evolution``), the infinite strip (``pipeline``), and a seeded
CLI (``cli``).
"""

from .errors import (
    BranchRangeError,
    ConfigError,
    GridMismatchError,
    InadmissibleBranchError,
    NumericalError,
    PreconditionError,
    RandBilliardsError,
    SingularAngleError,
    TruncationError,
)
from .feres import (
    BRANCH_SIGNS,
    BaseAngle,
    admissible_branches,
    apply_branch,
    branch_probabilities,
    breakpoints,
    probability_table,
    sample_step,
    u,
)
from .reachable import (
    ReachableSet,
    SymbolicAngle,
    is_aperiodic,
    is_irreducible,
    reachable_angles,
    reaches_interval,
    stationary_distribution,
    symbolic_value,
    transition_matrix,
)
from .circle import (
    CausticEstimate,
    JacobianAccumulator,
    PhasePoint,
    Trajectory,
    accumulate_jacobian,
    caustic,
    chord_distance_check,
    circle_step,
    dense_orbit_discrepancy,
    jacobian_step,
    lyapunov_estimate,
    prescribed_orbit,
    ring_coverage,
    simulate,
    trajectory_csv,
    trajectory_svg,
)
from .evolution import (
    AngleDensity,
    InvariantFamilyReport,
    SkewState,
    aligned_bins,
    density_csv,
    ensemble_step,
    invariant_family_check,
    invariant_intervals,
    invariant_union_mu,
    kernel_pushforward,
    knudsen_run,
    liouville_residual,
    mu_density,
    mu_measure,
    product_measure_evolution,
    skew_branch,
    skew_ensemble_step,
    skew_step,
    total_variation,
    transfer_matrix,
)
from .pipeline import (
    BOTTOM,
    TOP,
    PipelineJacobian,
    PipelineRun,
    PipelineState,
    lyapunov_from_run,
    pipeline_csv,
    pipeline_jacobian_step,
    pipeline_lyapunov,
    pipeline_simulate,
    pipeline_step,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "RandBilliardsError",
    "SingularAngleError",
    "BranchRangeError",
    "InadmissibleBranchError",
    "TruncationError",
    "PreconditionError",
    "NumericalError",
    "GridMismatchError",
    "ConfigError",
    # feres
    "BaseAngle",
    "BRANCH_SIGNS",
    "u",
    "apply_branch",
    "branch_probabilities",
    "probability_table",
    "admissible_branches",
    "breakpoints",
    "sample_step",
    # reachable
    "SymbolicAngle",
    "ReachableSet",
    "symbolic_value",
    "reachable_angles",
    "transition_matrix",
    "is_irreducible",
    "is_aperiodic",
    "stationary_distribution",
    "reaches_interval",
    # circle
    "PhasePoint",
    "Trajectory",
    "CausticEstimate",
    "JacobianAccumulator",
    "circle_step",
    "simulate",
    "prescribed_orbit",
    "dense_orbit_discrepancy",
    "caustic",
    "chord_distance_check",
    "ring_coverage",
    "jacobian_step",
    "accumulate_jacobian",
    "lyapunov_estimate",
    "trajectory_csv",
    "trajectory_svg",
    # evolution
    "AngleDensity",
    "SkewState",
    "InvariantFamilyReport",
    "mu_measure",
    "mu_density",
    "aligned_bins",
    "invariant_intervals",
    "invariant_union_mu",
    "kernel_pushforward",
    "transfer_matrix",
    "ensemble_step",
    "total_variation",
    "knudsen_run",
    "invariant_family_check",
    "skew_step",
    "skew_branch",
    "skew_ensemble_step",
    "liouville_residual",
    "product_measure_evolution",
    "density_csv",
    # pipeline
    "BOTTOM",
    "TOP",
    "PipelineState",
    "PipelineJacobian",
    "PipelineRun",
    "pipeline_step",
    "pipeline_jacobian_step",
    "pipeline_simulate",
    "pipeline_lyapunov",
    "lyapunov_from_run",
    "pipeline_csv",
]
