"""Numerical laboratory for mixed stochastic differential equations.

Synthesizes Wiener and fractional Brownian drivers exactly on uniform
grids, integrates Holder paths pathwise, solves equations driven by both
noise types with one Euler scheme, and runs the Monte Carlo studies that
probe moment and exponential-moment finiteness of the solutions.
"""

from .analysis import (
    GrrReport,
    NormReport,
    grr_functional,
    holder_exponent_estimate,
    holder_seminorm,
    norm_report,
    sup_norm,
)
from .errors import (
    ConfigError,
    DomainError,
    EstimationError,
    GridMismatchError,
    MixedSdeError,
    ResourceError,
    SynthesisError,
)
from .fbm import (
    fbm_covariance,
    fbm_covariance_matrix,
    generate_drivers,
    generate_fbm,
    generate_wiener,
)
from .grids import DriverSpec, TimeGrid, check_hurst
from .models import (
    AssumptionReport,
    CoefficientField,
    CoupledModelSpec,
    ModelSpec,
    model_zoo,
    coupled_growth_power_bound,
    validate_assumptions,
)
from .moments import (
    ExponentBoundaryReport,
    FerniqueTailReport,
    MomentEstimate,
    MomentTarget,
    StabilityTable,
    exp_moment_estimate,
    exponent_boundary_study,
    fernique_tail_check,
    grid_stability_study,
    moment_estimate,
    sup_moment_estimate,
    exp_moment_exponent_bound,
)
from .paths import DiscretePath, PathBatch
from .solver import (
    GeometricParams,
    SolveOutput,
    closed_form_geometric,
    closed_form_geometric_batch,
    euler_coupled,
    euler_mixed,
    geometric_convergence_study,
    solve_coupled,
    solve_model,
)
from .young import YoungResult, rs_sum, young_integrate, young_love_constant, young_love_rhs

__version__ = "0.1.0"
