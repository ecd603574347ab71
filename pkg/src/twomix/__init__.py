"""Solvers and benchmarks for over-specified two-component Gaussian mixture fitting.

The package provides three model variants (isotropic, diagonal, general
two-location), EM and exponential-step-size first-order (ELU) solvers with
validation-based early stopping, numerical verification of the population
landscape conditions that explain their behavior, and a benchmark harness
measuring statistical radii and iteration complexity as functions of the
sample size.
"""
from .core import (
    DegenerateComponentError,
    DiagonalParams,
    FitError,
    GeneralParams,
    InfeasibleIterateError,
    IsotropicParams,
    NonFiniteIterateError,
    TruthSpec,
    deterministic_sum,
    location_error_symmetric,
    logsumexp2,
    scale_error,
    wasserstein_general,
)
from .diagonal import (
    DiagonalMomentCache,
    f_bar_n,
    grad_f_bar_n,
    neg_loglik_diag,
    population_f_bar,
    population_grad_f_bar,
    profile_sigma2_diag,
)
from .general import (
    GeneralMomentCache,
    f_tilde_n,
    grad_f_tilde_n,
    neg_loglik_general,
    profile_sigma2_general,
    responsibilities,
)
from .isotropic import (
    MomentCache,
    f_n,
    grad_f_n,
    moment_sigma2,
    neg_loglik,
    population_f,
    population_grad_f,
    population_hess_f,
    population_hess_eigs,
)
from .quadrature import QuadratureRule, gauss_hermite
from .sampling import (
    Dataset,
    SplitDataset,
    load_dataset_csv,
    sample_gaussian,
    sample_symmetric_mixture,
    save_dataset_csv,
    split_train_val,
)
from .solvers import (
    DiagnoseReport,
    FitTrace,
    SolverConfig,
    default_init,
    diagnose,
    elu_step_diagonal,
    elu_step_general,
    elu_step_isotropic,
    em_step_diagonal,
    em_step_general,
    em_step_isotropic,
    fit,
    schedule_conditions,
    step_multiplier,
    warn_on_schedule_conditions,
)
from .harness import (
    FigureRow,
    IterationScalingResult,
    SlopeFit,
    SweepResult,
    SweepRow,
    SweepSpec,
    child_seed,
    fit_loglog_slope,
    load_sweep_csv,
    run_figure,
    run_iteration_scaling,
    run_sweep,
    save_figure_csv,
    save_sweep_csv,
    save_trace_csv,
    sweep_init,
)
from .theory import (
    GradCheckReport,
    HomogeneityReport,
    PseudoConvexityReport,
    StabilityReport,
    check_homogeneity_diagonal,
    check_homogeneity_isotropic,
    check_pseudo_convexity,
    check_stability_scaling,
    gradcheck,
    report_to_json,
)

__version__ = "0.1.0"
