"""Thick (interval) null hypothesis testing.

A thick null states that the population mean lies within a practically
irrelevant distance (MPSD) of a reference value ``mu0``.  This package
provides six decision rules for such hypotheses, including a
prior-predictive thick t-test, and a seeded Monte Carlo engine that
compares their error rates.

Examples
--------
>>> from thicknull import DiscreteUniform, SampleStats, ThickNull, thick_p
>>> stats = SampleStats(n=20, mean=106.0, sd=10.0)
>>> round(thick_p(stats, ThickNull(100.0, 5.0), DiscreteUniform()), 4)
0.1262
"""

from .analytics import (
    AlphaSweep,
    ConfusionCounts,
    alpha_sweep,
    decile_bins,
    error_rates,
    error_table,
    normalized_rates_by_power,
    success_by_decile,
    success_by_power,
)
from .decisions import (
    DecisionConfig,
    DegenerateSampleError,
    Method,
    SampleStats,
    Verdict,
    decide_batch,
    decide_conventional,
    decide_distance,
    decide_interval,
    decide_mesp,
    decide_small_alpha,
    decide_thick,
    interval_p,
    t_test_p,
    thick_p,
    thick_p_supremum,
)
from .numerics import (
    ConvergenceError,
    DomainError,
    QuadratureSpec,
    integrate,
    normal_cdf,
    normal_quantile,
    reg_inc_beta,
    student_t_cdf,
    student_t_quantile,
)
from .priors import (
    ContinuousUniform,
    DiscreteUniform,
    EmpiricalKDE,
    InsufficientDataError,
    NearestEdge,
    PointMass,
    Prior,
    ThickNull,
    TruncatedNormal,
    fit_kde,
    fit_truncated_normal,
    prior_mix,
    silverman_bandwidth,
)
from .simulation import (
    CaseResult,
    CaseSpec,
    ScenarioConfig,
    StudyResults,
    main_scenario,
    nominal_power,
    normal_mu_scenario,
    run_case,
    run_study,
)

__version__ = "0.1.0"
