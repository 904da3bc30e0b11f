"""Sharp minimax detection and estimation in the Gaussian sequence model."""

from .adaptive import (
    AdaptiveCoefficients, AdaptiveTest, OracleTest, SizeEstimateProbe, Tuning,
    adaptive_coefficients, adaptive_statistic, adaptive_test, clamped_M, cutoff_N,
    default_tuning, estimate_M, estimate_M_variance, noncentrality,
    noncentrality_lower_bound, oracle_M0, oracle_statistic, split_adaptive_statistic,
    split_levels,
)
from .detectors import (
    QuadraticTest, ermakov_test, in_class_D, neyman_pearson_check, noncentrality_L,
    quadratic_statistic,
)
from .estimation import (
    EstimationTuning, FilterEstimator, GolubevEstimator, LinearFilter, ZeroEstimator,
    default_estimation_tuning, estimation_M0, exact_filter_risk, golubev_adaptive_estimate,
    golubev_alpha, golubev_cutoff, golubev_oracle_filter, pinsker_filter,
    pinsker_least_favorable, pinsker_mu, worst_case_bias, worst_case_risk,
)
from .exceptions import (
    DegenerateError, InfeasibleError, InvalidArgumentError, SharpAdaptError,
    TuningInfeasibleError,
)
from .harness import (
    BivariateLabResult, MCResult, bivariate_lab, estimate_estimation_risk, estimate_size,
    estimate_type2, paired_risk_difference,
)
from .normal import normal_cdf, upper_quantile
from .saddlepoint import (
    ContinuousSaddle, SaddlePoint, adaptive_radius, asymptotic_type2, continuous_saddlepoint,
    correlation_r, ermakov_A, ermakov_A0, ermakov_A1, finite_correlation,
    general_lambda_asymptotics, pinsker_constant, saddle_value, shape_energy,
    solve_saddlepoint,
)
from .sequence import (
    AlternativeSpec, Observations, Signal, l2_norm_sq, membership, read_signal,
    separation_radius, simulate_observations, sobolev_norm, write_signal,
)

__version__ = "0.1.0"
