"""Preservation metrics, rate predictions, optimal design, and rate fitting.

The central quantity for independent noise is the variance-expectation
ratio ``sqrt(tr D[Theta X^T]) / tr E[X X^T]`` (with x0 = 0); its decay
exponent in the observation count matches the decay of the inference error.
For lag-dependent noise the analogue is an interval: a non-vanishing center
``tr E[Xi X_xi^T] / tr E[X_xi X_xi^T]`` plus a ``c_sigma``-scaled deviation
half-width.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np
import scipy.integrate
import scipy.stats

from .errors import InsufficientPoints, NonPositiveValue, QuadratureFailure
from .moments import (
    exact_dependent_moments,
    exact_independent_moments,
    independent_trace_curves,
)
from .noise import LagCoefficients, NoiseSchedule

DEFAULT_C_SIGMA = 3.0
DEFAULT_BURN_IN = 50.0
QUAD_REL_TOL = 1e-8


class _JsonMixin:
    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


@dataclass(frozen=True)
class RatioValue(_JsonMixin):
    """Variance-expectation ratio at a single observation count."""

    value: float
    T: int


@dataclass(frozen=True)
class RatioInterval(_JsonMixin):
    """Center and half-width of the dependent-noise ratio interval."""

    center: float
    half_width: float
    c_sigma: float
    T: int

    @property
    def bounds(self) -> tuple[float, float]:
        return (self.center - self.half_width, self.center + self.half_width)


@dataclass(frozen=True)
class RateFit(_JsonMixin):
    """Fitted log-log slope of a decay curve with fit diagnostics."""

    exponent: float
    stderr: float
    r_squared: float
    points_used: int


@dataclass(frozen=True)
class Regime:
    """Noise/topology regime selector for :func:`predicted_rate`."""

    kind: str
    alpha: float | None = None


IID_STABLE = Regime("iid_stable")
IID_MARGINAL = Regime("iid_marginal")
IID_EXPLOSIVE = Regime("iid_explosive")


def indep_decay(alpha: float) -> Regime:
    return Regime("indep_decay", float(alpha))


def dep_decay(alpha: float) -> Regime:
    return Regime("dep_decay", float(alpha))


@dataclass(frozen=True)
class RatePrediction:
    """Predicted decay behaviour of a metric curve.

    ``exponent`` is the power of T (None for the explosive regime, which
    decays exponentially).  ``constant_weight`` carries the alpha-dependent
    prefactor sqrt((alpha-1)/2^alpha) where the theory pins one down.
    Dependent-noise regimes have a non-vanishing center (``constant_floor``)
    and the width decays with ``width_exponent`` (None when only logarithmic
    or constant-width behaviour is predicted).
    """

    exponent: float | None
    is_exponential: bool = False
    log_factor: bool = False
    constant_weight: float | None = None
    constant_floor: bool = False
    width_exponent: float | None = None
    width_log: bool = False


def r_theta(W, sched: NoiseSchedule, T: int) -> RatioValue:
    """Variance-expectation ratio for independent noise (x0 = 0 convention)."""
    rep = exact_independent_moments(W, sched, T)
    return RatioValue(value=math.sqrt(rep.trace_var_theta_x) / rep.trace_mean_xx, T=T)


def r_theta_curve(W, sched: NoiseSchedule, Ts) -> np.ndarray:
    """Ratio evaluated on a whole T grid in one pass."""
    Ts = np.asarray(Ts, dtype=int)
    _, trace_var, trace_mean = independent_trace_curves(W, sched, int(Ts.max()))
    idx = Ts - 2
    if np.any(idx < 0):
        raise ValueError("all T must be >= 2")
    return np.sqrt(trace_var[idx]) / trace_mean[idx]


def r_xi(
    W,
    sched: NoiseSchedule,
    T: int,
    p: LagCoefficients,
    c_sigma: float = DEFAULT_C_SIGMA,
) -> RatioInterval:
    """Expectation-expectation ratio interval for lag-dependent noise."""
    if c_sigma < 1.0:
        raise ValueError(f"c_sigma must be >= 1, got {c_sigma}")
    rep = exact_dependent_moments(W, sched, T, p)
    denom = rep.mean_trace_xixi
    return RatioInterval(
        center=rep.mean_trace_xi_x / denom,
        half_width=c_sigma * math.sqrt(rep.var_trace_xi_x) / denom,
        c_sigma=c_sigma,
        T=T,
    )


def harmonic_power_sum(alpha: float, sigma0_sq: float, T: int) -> tuple[float, float]:
    """Variance sum h and its integral comparison F over the first T steps.

    ``h = sum_{t=0}^{T-1} sigma0^2 / (t+1)^alpha`` by direct summation;
    ``F = integral_1^T sigma0^2 / y^alpha dy`` in closed form (log at
    alpha = 1).  Their ratio staying bounded is the Euler-Maclaurin
    increment-scale fact the rate analysis leans on.
    """
    if T < 2:
        raise ValueError(f"T must be >= 2, got {T}")
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    t = np.arange(T, dtype=float)
    h = sigma0_sq * float(np.sum((t + 1.0) ** (-alpha)))
    if alpha == 1.0:
        F = sigma0_sq * math.log(T)
    else:
        F = sigma0_sq * (T ** (1.0 - alpha) - 1.0) / (1.0 - alpha)
    return h, F


def optimal_alpha() -> float:
    """Decay power giving the slowest error decay: (1 + ln 2) / ln 2."""
    return (1.0 + math.log(2.0)) / math.log(2.0)


def alpha_rate_constant(alpha: float) -> float:
    """Prefactor (alpha - 1) / 2^alpha governing the alpha > 1 rate constant."""
    return (alpha - 1.0) / 2.0**alpha


def predicted_rate(regime: Regime) -> RatePrediction:
    """Theoretical decay behaviour for each spectral-radius / noise regime.

    For decaying independent noise with alpha < 1 the ratio is the square
    root of two additive terms; the reported exponent is the slower-decaying
    (dominant) of the pair, i.e. max(-1, -(3 - alpha)/2) = -1.
    """
    if regime.kind == "iid_stable":
        return RatePrediction(exponent=-0.5)
    if regime.kind == "iid_marginal":
        return RatePrediction(exponent=-1.0)
    if regime.kind == "iid_explosive":
        return RatePrediction(exponent=None, is_exponential=True)
    if regime.kind == "indep_decay":
        a = regime.alpha
        if a < 1.0:
            return RatePrediction(exponent=max(-1.0, -(3.0 - a) / 2.0))
        if a == 1.0:
            return RatePrediction(exponent=-1.0, log_factor=True)
        return RatePrediction(
            exponent=-1.0, constant_weight=math.sqrt(alpha_rate_constant(a))
        )
    if regime.kind == "dep_decay":
        a = regime.alpha
        if a < 1.0:
            return RatePrediction(
                exponent=0.0, constant_floor=True, width_exponent=-(1.0 - a) / 2.0
            )
        if a == 1.0:
            return RatePrediction(exponent=0.0, constant_floor=True, width_log=True)
        return RatePrediction(
            exponent=0.0,
            constant_floor=True,
            constant_weight=math.sqrt(alpha_rate_constant(a)),
            width_exponent=0.0,
        )
    raise ValueError(f"unknown regime kind {regime.kind!r}")


def general_rate(g, T: int) -> float:
    """Rate characterization for a general non-increasing variance profile.

    Numerically evaluates
    ``sqrt(int_1^{T-1} g(y2) (int_0^{y2-1} g(y1) dy1) dy2) / (T int_0^{T-2} g(y) dy)``
    by adaptive quadrature at 1e-8 relative tolerance.  The caller is
    responsible for g satisfying the smooth-decay condition; it is not
    checked mechanically.
    """
    if T < 3:
        raise ValueError(f"T must be >= 3, got {T}")

    def _quad(fn, lo, hi):
        with warnings.catch_warnings():
            warnings.simplefilter("error", scipy.integrate.IntegrationWarning)
            try:
                val, _ = scipy.integrate.quad(fn, lo, hi, epsrel=QUAD_REL_TOL, limit=200)
            except scipy.integrate.IntegrationWarning as exc:
                raise QuadratureFailure(str(exc)) from exc
        return val

    inner = lambda y2: _quad(g, 0.0, y2 - 1.0)
    numerator = _quad(lambda y2: g(y2) * inner(y2), 1.0, T - 1.0)
    denominator = T * _quad(g, 0.0, T - 2.0)
    if numerator < 0 or denominator <= 0:
        raise QuadratureFailure(
            f"degenerate integrals: numerator {numerator}, denominator {denominator}"
        )
    return math.sqrt(numerator) / denominator


def rate_curve_csv(curve) -> str:
    """Serialize (T, value) pairs with their logs for external slope tooling."""
    lines = ["T,value,ln_T,ln_value"]
    for T, v in curve:
        T, v = float(T), float(v)
        lines.append(f"{T:.17g},{v:.17g},{math.log(T):.17g},{math.log(v):.17g}")
    return "\n".join(lines) + "\n"


def fit_decay_exponent(curve, burn_in: float = DEFAULT_BURN_IN) -> RateFit:
    """OLS line through (ln T, ln value); slope is the decay exponent.

    ``curve`` is a sequence of (T, value) pairs; points with T < burn_in are
    discarded to skip the transient the asymptotic statements ignore.
    """
    pts = [(float(T), float(v)) for T, v in curve if float(T) >= burn_in]
    if len(pts) < 3:
        raise InsufficientPoints(
            f"need >= 3 points with T >= {burn_in}, got {len(pts)}"
        )
    Ts = np.array([t for t, _ in pts])
    vals = np.array([v for _, v in pts])
    if np.any(vals <= 0):
        raise NonPositiveValue("log-log fit requires positive values")
    res = scipy.stats.linregress(np.log(Ts), np.log(vals))
    return RateFit(
        exponent=float(res.slope),
        stderr=float(res.stderr),
        r_squared=float(res.rvalue**2),
        points_used=len(pts),
    )
