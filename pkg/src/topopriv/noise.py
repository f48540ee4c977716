"""Variance schedules and generation of independent / lag-dependent noises.

The injected noise at step ``t`` has per-entry variance ``sigma0_sq * g(t)``
where ``g`` is either the polynomial profile ``1 / (t+1)**alpha`` or a
user-supplied non-increasing function normalized to ``g(0) = 1``.
Time-dependent noises are finite impulse combinations of an independent
source: ``xi_t = sum_l p_l * theta_{t-l}`` with out-of-range terms dropped,
so the one-lag pair ``p = (1, -1)`` gives ``xi_0 = theta_0`` and
``xi_t = theta_t - theta_{t-1}`` afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import LeadingZero, ZeroSumViolated

ZERO_SUM_TOL = 1e-12

GAUSSIAN_KURTOSIS = 3.0
UNIFORM_KURTOSIS = 9.0 / 5.0


@dataclass(frozen=True)
class PolynomialDecay:
    """Variance profile ``g(t) = 1 / (t+1)**alpha``; alpha = 0 is i.i.d."""

    alpha: float

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")

    def __call__(self, t):
        return (np.asarray(t, dtype=float) + 1.0) ** (-self.alpha)


@dataclass(frozen=True)
class GeneralG:
    """General non-increasing variance profile, normalized to g(0) = 1."""

    g: Callable[[float], float]

    def __post_init__(self):
        g0 = float(self.g(0))
        if abs(g0 - 1.0) > 1e-9:
            raise ValueError(f"g must be normalized with g(0) = 1, got g(0) = {g0}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.vectorize(self.g, otypes=[float])(t)
        return out if out.shape else float(out)


@dataclass(frozen=True)
class NoiseSchedule:
    """Base variance, decay profile, and distribution family of the noise.

    ``kurtosis_factor`` is E[theta^4] / sigma^4, needed by the exact moment
    formulas; it defaults to the value implied by ``distribution``.
    """

    sigma0_sq: float
    profile: PolynomialDecay | GeneralG = PolynomialDecay(0.0)
    distribution: str = "gaussian"
    kurtosis_factor: float | None = None

    def __post_init__(self):
        if self.sigma0_sq <= 0:
            raise ValueError(f"sigma0_sq must be positive, got {self.sigma0_sq}")
        if self.distribution not in ("gaussian", "uniform"):
            raise ValueError(f"unknown distribution {self.distribution!r}")
        if self.kurtosis_factor is None:
            k4 = GAUSSIAN_KURTOSIS if self.distribution == "gaussian" else UNIFORM_KURTOSIS
            object.__setattr__(self, "kurtosis_factor", k4)
        if self.kurtosis_factor < 1.0:
            raise ValueError("fourth moment cannot be smaller than variance squared")

    @property
    def alpha(self) -> float | None:
        return self.profile.alpha if isinstance(self.profile, PolynomialDecay) else None


def variance_at(sched: NoiseSchedule, t) -> float | np.ndarray:
    """Per-entry noise variance at step ``t`` (vectorized over arrays)."""
    out = sched.sigma0_sq * sched.profile(t)
    return float(out) if np.ndim(out) == 0 else out


def variances(sched: NoiseSchedule, T: int) -> np.ndarray:
    """Variance sequence ``sigma_t^2`` for t = 0..T-1."""
    return np.atleast_1d(variance_at(sched, np.arange(T)))


@dataclass(frozen=True)
class LagCoefficients:
    """Finite impulse weights (p_0, ..., p_k) applied to independent noise.

    For k >= 1 the weights must sum to zero (so the transformed noise has a
    telescoping accumulation) and p_0 must be nonzero.
    """

    p: tuple

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(float(v) for v in self.p))

    @property
    def k(self) -> int:
        return len(self.p) - 1

    @property
    def is_identity(self) -> bool:
        return self.p == (1.0,)

    @property
    def is_one_lag(self) -> bool:
        return self.p == (1.0, -1.0)


ONE_LAG = LagCoefficients((1.0, -1.0))
INDEPENDENT = LagCoefficients((1.0,))


def validate_lag_coeffs(p) -> LagCoefficients:
    """Validate raw lag coefficients.

    Raises
    ------
    LeadingZero
        If p_0 = 0.
    ZeroSumViolated
        If k >= 1 and the coefficients do not sum to zero within 1e-12.
    """
    p = tuple(float(v) for v in p)
    if not p:
        raise ValueError("lag coefficients must be non-empty")
    if p[0] == 0.0:
        raise LeadingZero("leading lag coefficient p_0 must be nonzero")
    if len(p) > 1 and abs(sum(p)) > ZERO_SUM_TOL:
        raise ZeroSumViolated(f"lag coefficients must sum to 0, got {sum(p)!r}")
    return LagCoefficients(p)


@dataclass(frozen=True)
class NoiseMatrix:
    """n x T noise realization; column t is the vector injected at step t."""

    values: np.ndarray
    kind: str  # "independent" or "dependent"
    seed: int | None = None
    lag: LagCoefficients | None = None
    schedule: NoiseSchedule | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def T(self) -> int:
        return self.values.shape[1]

    def to_csv(self) -> str:
        return "\n".join(",".join(f"{v:.17g}" for v in row) for row in self.values) + "\n"


# Samples are snapped to a power-of-two grid of 2^-48 relative to sigma_0.
# Grid multiples below 2^53 subtract and accumulate exactly in binary64, so
# the one-lag telescoping identity sum(xi_t) = theta_{T-1} holds bit-exactly
# under any summation order.  The distributional distortion is O(2^-48).
_QUANT_BITS = 48


def _quantize(values: np.ndarray, sigma0: float) -> np.ndarray:
    delta = 2.0 ** (math.frexp(sigma0)[1] - _QUANT_BITS)
    return np.rint(values / delta) * delta


def sample_independent(sched: NoiseSchedule, n: int, T: int, seed: int) -> NoiseMatrix:
    """Draw an independent zero-mean noise matrix with scheduled variances.

    Entries come from the seeded generator in a fixed t-major order (all of
    step t before step t+1, node index innermost), so a length-T draw is a
    bit-identical prefix of any longer draw with the same seed.
    """
    if n < 1 or T < 1:
        raise ValueError(f"n and T must be >= 1, got n={n}, T={T}")
    rng = np.random.default_rng(seed)
    sigma = np.sqrt(variances(sched, T))
    if sched.distribution == "gaussian":
        raw = rng.standard_normal((T, n))
    else:
        # symmetric uniform on [-sqrt(3), sqrt(3)] has unit variance
        raw = rng.uniform(-np.sqrt(3.0), np.sqrt(3.0), size=(T, n))
    values = _quantize((raw * sigma[:, None]).T, math.sqrt(sched.sigma0_sq))
    return NoiseMatrix(values=values, kind="independent", seed=seed, schedule=sched)


def derive_dependent(theta: NoiseMatrix, p: LagCoefficients) -> NoiseMatrix:
    """Apply lag coefficients to an independent noise matrix.

    ``xi_t = sum_{l=0}^{min(k, t)} p_l * theta_{t-l}``; terms that would
    reach before t = 0 are dropped, so the one-lag pair gives
    ``xi_0 = theta_0`` exactly.  ``p = (1,)`` is a passthrough.
    """
    if theta.kind != "independent":
        raise ValueError("derive_dependent expects an independent source matrix")
    p = validate_lag_coeffs(p.p if isinstance(p, LagCoefficients) else p)
    vals = theta.values
    if p.is_identity:
        out = vals.copy()
    else:
        out = p.p[0] * vals
        for ell in range(1, min(p.k, theta.T - 1) + 1):
            out[:, ell:] += p.p[ell] * vals[:, :-ell]
    return NoiseMatrix(
        values=out,
        kind="independent" if p.is_identity else "dependent",
        seed=theta.seed,
        lag=None if p.is_identity else p,
        schedule=theta.schedule,
    )
