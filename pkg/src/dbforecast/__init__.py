"""Discrepancy-weighted forecasting for non-stationary time series.

The package fits weighted regression hypotheses whose per-sample weights are
driven by instantaneous discrepancies — exact trust-region suprema measuring
how far each training point's loss landscape sits from a proxy for the
next-step distribution.  It ships the discrepancy machinery, four joint
weight/hypothesis fitters, synthetic generators, an ARIMA baseline, and a
rolling-origin evaluation protocol, plus a batch CLI (``dbforecast``).
"""

from .baseline import (
    ArimaModel,
    ArimaOrder,
    OneStepPredictions,
    css_residuals,
    difference,
    fit_arima,
    forecast_arima,
    one_step_predictions,
    undifference,
)
from .core import (
    BadWindow,
    DataFormatError,
    DbfError,
    DegenerateSample,
    DimensionMismatch,
    LengthMismatch,
    LossKind,
    NonFiniteData,
    NotPSD,
    NumericalFailure,
    RegressionDataset,
    SeriesTooShort,
    SingularSystem,
    TimeSeries,
    WeightVector,
    embed_lags,
    weighted_empirical_loss,
)
from .datagen import GenerationResult, GeneratorSpec, generate, generate_markov
from .discrepancy import (
    InstantDiscrepancies,
    MarkovChainSpec,
    TargetProxy,
    empirical_discrepancy,
    generator_moment_discrepancies,
    generator_moment_quadratics,
    instantaneous_discrepancies,
    markov_discrepancy_oracle,
    target_proxy,
    upper_bound_discrepancy,
)
from .evaluation import (
    ArimaAdapter,
    DbfAdapter,
    EvaluationReport,
    ProtocolSpec,
    RidgeAdapter,
    TwoStageAdapter,
    default_radius,
    mse,
    paired_t_test,
    resolve_schedule,
    run_protocol,
    running_mse,
    student_t_cdf,
)
from .kernels import (
    FeatureMatrix,
    GramMatrix,
    KernelSpec,
    feature_factorize,
    feature_rows,
    gram,
    kernel_radius,
    linear_kernel,
    polynomial_kernel,
    rbf_kernel,
)
from .lp import LinearProgram, LpResult, LpStatus, solve_lp
from .solvers import (
    DualRidge,
    FitResult,
    SolverConfig,
    convex_objective_value,
    fit_dbf_alternating,
    fit_dbf_convex,
    fit_dbf_dual,
    fit_two_stage,
    predict,
    q_step,
    weighted_ridge_dual,
    weighted_ridge_primal,
)
from .trs import (
    BallConstraint,
    KktCertificate,
    QuadraticForm,
    TrsSolution,
    check_kkt,
    max_quadratic_on_ball,
    sup_abs_quadratic_on_ball,
)

__version__ = "0.1.0"

__all__ = [
    "ArimaAdapter",
    "ArimaModel",
    "ArimaOrder",
    "BadWindow",
    "BallConstraint",
    "DataFormatError",
    "DbfAdapter",
    "DbfError",
    "DegenerateSample",
    "DimensionMismatch",
    "DualRidge",
    "EvaluationReport",
    "FeatureMatrix",
    "FitResult",
    "GenerationResult",
    "GeneratorSpec",
    "GramMatrix",
    "InstantDiscrepancies",
    "KernelSpec",
    "KktCertificate",
    "LengthMismatch",
    "LinearProgram",
    "LossKind",
    "LpResult",
    "LpStatus",
    "MarkovChainSpec",
    "NonFiniteData",
    "NotPSD",
    "NumericalFailure",
    "OneStepPredictions",
    "ProtocolSpec",
    "QuadraticForm",
    "RegressionDataset",
    "RidgeAdapter",
    "SeriesTooShort",
    "SingularSystem",
    "SolverConfig",
    "TargetProxy",
    "TimeSeries",
    "TrsSolution",
    "TwoStageAdapter",
    "WeightVector",
    "check_kkt",
    "convex_objective_value",
    "css_residuals",
    "default_radius",
    "difference",
    "embed_lags",
    "empirical_discrepancy",
    "feature_factorize",
    "feature_rows",
    "fit_arima",
    "fit_dbf_alternating",
    "fit_dbf_convex",
    "fit_dbf_dual",
    "fit_two_stage",
    "forecast_arima",
    "generate",
    "generate_markov",
    "generator_moment_discrepancies",
    "generator_moment_quadratics",
    "gram",
    "instantaneous_discrepancies",
    "kernel_radius",
    "linear_kernel",
    "markov_discrepancy_oracle",
    "max_quadratic_on_ball",
    "mse",
    "one_step_predictions",
    "paired_t_test",
    "polynomial_kernel",
    "predict",
    "q_step",
    "rbf_kernel",
    "resolve_schedule",
    "run_protocol",
    "running_mse",
    "solve_lp",
    "student_t_cdf",
    "sup_abs_quadratic_on_ball",
    "target_proxy",
    "undifference",
    "upper_bound_discrepancy",
    "weighted_empirical_loss",
    "weighted_ridge_dual",
    "weighted_ridge_primal",
]
