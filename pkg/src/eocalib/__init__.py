"""Calibration of fixed-horizon risk prediction tools under right censoring.

The expected-to-observed event ratio over a t0-year horizon cannot be
computed directly on censored cohorts because some subjects' t0-status
is unknown.  This package implements four estimators of that ratio
(known-status-only, follow-up-truncated, hybrid-truncation, and
Kaplan-Meier-imputed), their 95% intervals, two bias diagnostics, a
Monte-Carlo engine comparing the estimators on uniform event/censoring
designs, and a reproductive-history risk model for real-cohort use.
"""

from ._kernels import backend
from .calibration import (
    CalibrationReport,
    EORatioEstimate,
    ExpectedSums,
    ObservedCounts,
    ci_delta_km,
    ci_poisson,
    correction_c0_tilde,
    correction_c1,
    estimate_m0,
    estimate_m1,
    estimate_m2,
    estimate_m3,
    evaluate,
    evaluate_grouped,
    expected_sums,
    observed_counts,
)
from .errors import (
    CohortFileError,
    DegenerateVarianceError,
    EOCalibError,
    HorizonError,
    MissingCovariateError,
    NoEventsError,
    ValidationError,
)
from .risk_models import (
    RCMCoefficients,
    RCMCovariates,
    RiskModel,
    RosnerColditzModel,
    UniformModel,
    birth_index,
    rcm_log_incidence,
    t_year_risk,
    uniform_risk,
)
from .simulation import (
    SimulationDesign,
    SimulationSummary,
    paper_grid_designs,
    run_design,
    run_paper_grid,
    run_replicate,
    solve_omega,
)
from .survival import (
    Cohort,
    KMEstimate,
    StatusPartition,
    Subject,
    classify_subjects,
    empirical_cdf_known,
    greenwood_variance,
    kaplan_meier,
)

__version__ = "0.1.0"
