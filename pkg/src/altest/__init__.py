"""Alternating estimation for multi-response linear regression with
correlated noise, built on the generalized Dantzig selector."""

from .alternating import (
    AltEstConfig,
    BaselineRun,
    TrajectoryReport,
    run_altest,
    run_oracle_gds,
    run_ordinary_gds,
    select_gamma,
)
from .covest import CovEstimate, estimate_covariance, spectral_sandwich
from .errors import (
    AltEstError,
    BoundDivergenceError,
    ConfigError,
    IllConditionedCovarianceError,
    InfeasibleRadiusError,
    InsufficientDataError,
    InvalidModeError,
    InvalidParameterError,
)
from .gds import (
    GdsProblem,
    GdsSolution,
    NormDescriptor,
    assemble_problem,
    l1_norm,
    residual_dual_norm,
    solve_gds,
    solve_single_response,
)
from .geometry import (
    GeometryReport,
    McEstimate,
    PsiEstimate,
    bound_values,
    geometry_report,
    restricted_norm_compat,
    width_descent_cone,
    width_l1_ball,
    xi_factor,
    xi_minimizer_check,
)
from .model import (
    Dataset,
    ModelSpec,
    ResamplingPlan,
    make_block_sigma,
    make_sparse_theta,
    plan_resampling,
    sample_dataset,
)
from .rng import stream_rng

__all__ = [
    "AltEstConfig",
    "AltEstError",
    "BaselineRun",
    "BoundDivergenceError",
    "ConfigError",
    "CovEstimate",
    "Dataset",
    "GdsProblem",
    "GdsSolution",
    "GeometryReport",
    "IllConditionedCovarianceError",
    "InfeasibleRadiusError",
    "InsufficientDataError",
    "InvalidModeError",
    "InvalidParameterError",
    "McEstimate",
    "ModelSpec",
    "NormDescriptor",
    "PsiEstimate",
    "ResamplingPlan",
    "TrajectoryReport",
    "assemble_problem",
    "bound_values",
    "estimate_covariance",
    "geometry_report",
    "l1_norm",
    "make_block_sigma",
    "make_sparse_theta",
    "plan_resampling",
    "residual_dual_norm",
    "restricted_norm_compat",
    "run_altest",
    "run_oracle_gds",
    "run_ordinary_gds",
    "sample_dataset",
    "select_gamma",
    "solve_gds",
    "solve_single_response",
    "spectral_sandwich",
    "stream_rng",
    "width_descent_cone",
    "width_l1_ball",
    "xi_factor",
    "xi_minimizer_check",
]
