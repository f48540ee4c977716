"""Topology privacy for networked dynamics.

Simulates noise-injected linear consensus, mounts the OLS topology-inference
attack against it, and evaluates/designs privacy noise through exact-moment
ratio metrics and fitted decay rates.
"""

from .graph import (
    Adjacency,
    SpectralSummary,
    TopologyMatrix,
    has_spanning_tree,
    laplacian_weights,
    random_digraph,
    spectral_summary,
)
from .noise import (
    INDEPENDENT,
    ONE_LAG,
    GeneralG,
    LagCoefficients,
    NoiseMatrix,
    NoiseSchedule,
    PolynomialDecay,
    derive_dependent,
    sample_independent,
    validate_lag_coeffs,
    variance_at,
)
from .dynamics import TrajectoryBundle, deviation_series, simulate
from .inference import InferenceResult, inference_error, ols_estimate
from .moments import (
    BlockMatrices,
    MomentReport,
    build_blocks,
    exact_dependent_moments,
    exact_independent_moments,
    exact_state_deviation,
    exact_state_deviation_series,
    gamma_traces,
    quadratic_form_moments,
)
from .metrics import (
    IID_EXPLOSIVE,
    IID_MARGINAL,
    IID_STABLE,
    RateFit,
    RatePrediction,
    RatioInterval,
    RatioValue,
    Regime,
    dep_decay,
    fit_decay_exponent,
    general_rate,
    harmonic_power_sum,
    indep_decay,
    optimal_alpha,
    predicted_rate,
    r_theta,
    r_theta_curve,
    r_xi,
    rate_curve_csv,
)

__version__ = "0.1.0"

__all__ = [
    "Adjacency",
    "TopologyMatrix",
    "SpectralSummary",
    "laplacian_weights",
    "random_digraph",
    "has_spanning_tree",
    "spectral_summary",
    "NoiseSchedule",
    "PolynomialDecay",
    "GeneralG",
    "LagCoefficients",
    "NoiseMatrix",
    "INDEPENDENT",
    "ONE_LAG",
    "variance_at",
    "sample_independent",
    "derive_dependent",
    "validate_lag_coeffs",
    "TrajectoryBundle",
    "simulate",
    "deviation_series",
    "InferenceResult",
    "ols_estimate",
    "inference_error",
    "BlockMatrices",
    "MomentReport",
    "quadratic_form_moments",
    "gamma_traces",
    "build_blocks",
    "exact_independent_moments",
    "exact_dependent_moments",
    "exact_state_deviation",
    "exact_state_deviation_series",
    "RatioValue",
    "RatioInterval",
    "RateFit",
    "RatePrediction",
    "Regime",
    "IID_STABLE",
    "IID_MARGINAL",
    "IID_EXPLOSIVE",
    "indep_decay",
    "dep_decay",
    "r_theta",
    "r_theta_curve",
    "r_xi",
    "harmonic_power_sum",
    "optimal_alpha",
    "predicted_rate",
    "general_rate",
    "fit_decay_exponent",
    "rate_curve_csv",
    "__version__",
]
