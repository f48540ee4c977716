"""Exact moments of the trace quantities driving the preservation metrics.

Everything here is closed-form in the noise variances and Frobenius norms of
weight-matrix power combinations, so these values serve as ground truth for
every Monte Carlo estimate in the test-suite and the experiment harness.

Two independent routes are provided for the dependent-noise quantities: a
dense block-matrix construction (stacking the whole horizon into nT x nT
operators, feasible only for small instances) and closed-form summations
that scale to long horizons.  The tests require them to agree to 1e-10.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict

import numpy as np

from .errors import DimensionMismatch, InvalidMoment, TooLarge
from .graph import as_matrix
from .noise import (
    INDEPENDENT,
    LagCoefficients,
    NoiseSchedule,
    validate_lag_coeffs,
    variances,
)

BLOCK_SIZE_GUARD = 5000


@dataclass(frozen=True)
class BlockMatrices:
    """Dense nT x nT stacked-horizon operators.

    ``W_tilde`` maps the stacked noise vector to the stacked states (x0 = 0);
    ``H`` applies the lag transform; ``Q = H^T W_tilde H`` and
    ``Q_tilde = H^T W_tilde^T W_tilde H`` generate the trace quantities as
    quadratic forms in the independent noise.
    """

    n: int
    T: int
    W_tilde: np.ndarray
    Q_w: np.ndarray
    H: np.ndarray
    Q: np.ndarray
    Q_tilde: np.ndarray


@dataclass(frozen=True)
class MomentReport:
    """Exact moments of the trace quantities; unset sides stay None.

    Independent-noise side: ``trace_var_theta_x`` is the summed per-entry
    variance of Theta X^T and ``trace_mean_xx`` the expected squared state
    energy.  Dependent side: mean/variance of tr(Xi X_xi^T) and the mean of
    tr(X_xi X_xi^T).
    """

    trace_var_theta_x: float | None = None
    trace_mean_xx: float | None = None
    mean_trace_xi_x: float | None = None
    var_trace_xi_x: float | None = None
    mean_trace_xixi: float | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def quadratic_form_moments(Q, variances_, fourth_moments) -> tuple[float, float]:
    """Mean and variance of z = theta^T Q theta for independent zero-mean theta.

    mean = sum_l Q_ll v_l
    var  = sum_l Q_ll^2 (m4_l - v_l^2)
           + sum_{a != b} (Q_ab^2 + Q_ab Q_ba) v_a v_b

    The cross term Q_ab Q_ba is required for exactness on matrices with
    symmetric support (z only sees Q through its symmetric part); it
    vanishes on the triangular operators produced by the stacked-horizon
    constructions.
    """
    Q = np.asarray(Q, dtype=float)
    v = np.asarray(variances_, dtype=float)
    m4 = np.asarray(fourth_moments, dtype=float)
    m = Q.shape[0]
    if Q.shape != (m, m) or v.shape != (m,) or m4.shape != (m,):
        raise DimensionMismatch(
            f"need square Q with matching vectors, got {Q.shape}, {v.shape}, {m4.shape}"
        )
    if np.any(v <= 0):
        raise ValueError("variances must be positive")
    if np.any(m4 < v**2 - 1e-12 * v**2):
        raise InvalidMoment("fourth moments must be >= variance squared")
    d = np.diag(Q)
    mean = float(d @ v)
    P = Q * Q + Q * Q.T
    off = float(v @ P @ v) - float((2.0 * d * d) @ (v * v))
    var = float(d * d @ (m4 - v * v)) + off
    return mean, var


def _power_norm_series(M: np.ndarray, count: int) -> np.ndarray:
    """``||M^s||_F^2`` for s = 0..count-1, via iterated multiplication."""
    n = M.shape[0]
    out = np.empty(count)
    P = np.eye(n)
    for s in range(count):
        out[s] = np.einsum("ij,ij->", P, P)
        if s + 1 < count:
            P = P @ M
    return out


def _lag_combo_norm_series(M: np.ndarray, p: LagCoefficients, count: int) -> np.ndarray:
    """``||sum_l p_l M^{s-l}||_F^2`` for s = 0..count-1 (out-of-range terms dropped)."""
    n = M.shape[0]
    coeffs = p.p
    window: list[np.ndarray] = []  # powers M^s, M^{s-1}, ... newest first
    P = np.eye(n)
    out = np.empty(count)
    for s in range(count):
        window.insert(0, P)
        if len(window) > len(coeffs):
            window.pop()
        A = sum(c * Pm for c, Pm in zip(coeffs, window))
        out[s] = np.einsum("ij,ij->", A, A)
        if s + 1 < count:
            P = window[0] @ M
    return out


def gamma_traces(W, T: int) -> tuple[np.ndarray, np.ndarray]:
    """``tr(Gamma_t)`` and ``tr(Gamma*_t)`` for t = 1..T.

    Both equal the cumulative sums of squared Frobenius norms of the powers
    of W (trace cyclicity); the pair is returned for interface symmetry.
    """
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    f = _power_norm_series(as_matrix(W), T)
    tr = np.cumsum(f)
    return tr, tr.copy()


def build_blocks(W, T: int, p: LagCoefficients = INDEPENDENT) -> BlockMatrices:
    """Dense stacked-horizon operators for small instances.

    Block (t1, t2) of W_tilde is W^(t1-t2-1) for t1 > t2 and zero otherwise;
    block (t1, t2) of H is p_(t1-t2) I for 0 <= t1-t2 <= k.  Guarded to
    n*T <= 5000 since the products are dense (nT)^2 objects.
    """
    M = as_matrix(W)
    n = M.shape[0]
    if n * T > BLOCK_SIZE_GUARD:
        raise TooLarge(f"n*T = {n * T} exceeds dense-oracle guard {BLOCK_SIZE_GUARD}")
    p = validate_lag_coeffs(p.p if isinstance(p, LagCoefficients) else p)

    powers = [np.eye(n)]
    for _ in range(T - 1):
        powers.append(powers[-1] @ M)

    W_tilde = np.zeros((n * T, n * T))
    for t1 in range(T):
        for t2 in range(t1):
            W_tilde[t1 * n : (t1 + 1) * n, t2 * n : (t2 + 1) * n] = powers[t1 - t2 - 1]

    H = np.zeros((n * T, n * T))
    eye = np.eye(n)
    for t1 in range(T):
        for ell in range(min(p.k, t1) + 1):
            t2 = t1 - ell
            H[t1 * n : (t1 + 1) * n, t2 * n : (t2 + 1) * n] = p.p[ell] * eye

    Q_w = W_tilde.T @ W_tilde
    Q = H.T @ W_tilde @ H
    Q_tilde = H.T @ Q_w @ H
    return BlockMatrices(n=n, T=T, W_tilde=W_tilde, Q_w=Q_w, H=H, Q=Q, Q_tilde=Q_tilde)


def _stacked_moment_vectors(sched: NoiseSchedule, n: int, T: int):
    """Per-entry variances and fourth moments of the stacked noise vector."""
    v = np.repeat(variances(sched, T), n)
    m4 = sched.kurtosis_factor * v**2
    return v, m4


def independent_trace_curves(W, sched: NoiseSchedule, T_max: int):
    """``trace_var_theta_x`` and ``trace_mean_xx`` for every T = 2..T_max.

    Returns (Ts, trace_var, trace_mean) with all three aligned.  Shared
    power-norm prefixes make a whole observation-count sweep as cheap as the
    single largest evaluation.
    """
    if T_max < 2:
        raise ValueError(f"T_max must be >= 2, got {T_max}")
    M = as_matrix(W)
    v = variances(sched, T_max)
    f = _power_norm_series(M, T_max - 1)  # ||W^s||_F^2, s = 0..T_max-2

    # inner[t] = sum_{m<t} v_m f_{t-1-m}  (t = 1..T_max-1)
    conv = np.convolve(v[: T_max - 1], f)[: T_max - 1]
    # trace_var(T) = sum_{t=1}^{T-1} v_t inner[t]
    var_terms = v[1:T_max] * conv
    trace_var = np.cumsum(var_terms)

    # g_s = tr(Gamma*_s) = sum_{m<s} f_m;  trace_mean(T) = sum_s g_s v_{T-1-s}
    g = np.concatenate([[0.0], np.cumsum(f)])  # index s = 0..T_max-1
    conv2 = np.convolve(g, v)
    Ts = np.arange(2, T_max + 1)
    trace_mean = conv2[Ts - 1]
    return Ts, trace_var, trace_mean


def exact_independent_moments(W, sched: NoiseSchedule, T: int) -> MomentReport:
    """Closed-form tr(D[Theta X^T]) and tr(E[X X^T]) with x0 = 0.

    trace_var_theta_x = sum_{t=1}^{T-1} sigma_t^2 sum_{m<t} sigma_m^2 ||W^{t-m-1}||_F^2
    trace_mean_xx     = sum_{t=1}^{T-1} tr(Gamma*_{T-t}) sigma_{t-1}^2
    """
    if T < 2:
        raise ValueError(f"T must be >= 2, got {T}")
    _, trace_var, trace_mean = independent_trace_curves(W, sched, T)
    return MomentReport(
        trace_var_theta_x=float(trace_var[-1]), trace_mean_xx=float(trace_mean[-1])
    )


def _one_lag_dependent_moments(W, sched: NoiseSchedule, T: int) -> MomentReport:
    """Closed-form route for xi_t = theta_t - theta_{t-1}; scales to large T.

    Uses the stacked-operator block structure without materializing it: the
    diagonal blocks of Q are -I, sub-diagonal blocks depend only on the lag
    through (I - W)^2 W^(lag-2), and the diagonal blocks of Q_tilde are
    I + accumulated squared norms of W^(m+1) - W^m.
    """
    M = as_matrix(W)
    n = M.shape[0]
    v = variances(sched, T)
    m4 = sched.kurtosis_factor * v**2

    mean_xi_x = -n * float(np.sum(v[: T - 1]))

    # D_s = ||W^s - W^{s-1}||_F^2 for s = 1..T-2 (index 0 unused)
    count = max(T - 1, 2)
    D = np.zeros(count)
    B = M - np.eye(n)  # (W - I) W^{s-1} iterated
    P = B.copy()
    for s in range(1, count):
        D[s] = np.einsum("ij,ij->", P, P)
        if s + 1 < count:
            P = P @ M
    cumD = np.cumsum(D)  # cumD[j] = sum_{s<=j} D_s

    # mean tr(X_xi X_xi^T) = sum_{t=1}^{T-1} v_{t-1} (n + sum_{s<=T-1-t} D_s)
    t_idx = np.arange(1, T)
    mean_xixi = float(np.sum(v[t_idx - 1] * (n + cumD[T - 1 - t_idx])))

    # G_l = ||2 W^{l-1} - W^l - W^{l-2}||_F^2 = ||(W - I)^2 W^{l-2}||_F^2
    G = np.zeros(max(T - 1, 2))
    if T >= 3:
        G[1] = np.einsum("ij,ij->", 2 * np.eye(n) - M, 2 * np.eye(n) - M)
        BB = B @ B
        P = BB.copy()
        for ell in range(2, T - 1):
            G[ell] = np.einsum("ij,ij->", P, P)
            if ell + 1 < T - 1:
                P = P @ M
    s1 = n * float(np.sum(m4[: T - 1] - v[: T - 1] ** 2))
    # rows t1 = 2..T-1: sum_{t2<t1} G_{t1-t2} v_{t1-1} v_{t2-1}
    s2a = 0.0
    if T >= 3:
        convG = np.convolve(v[: T - 2], G[1 : T - 1])
        # inner(t1) = sum_{j=0}^{t1-2} G_{t1-1-j} v_j = convG[t1-2]
        s2a = float(np.sum(v[1 : T - 1] * convG[: T - 2]))
    # last block row: blocks (T, t2) = W^{T-1-t2} - W^{T-2-t2}, and I at t2 = T-1
    s2b = v[T - 1] * n * v[T - 2]
    if T >= 3:
        j = np.arange(T - 2)
        s2b += v[T - 1] * float(np.sum(D[T - 2 - j] * v[j]))
    var_xi_x = s1 + s2a + s2b

    return MomentReport(
        mean_trace_xi_x=mean_xi_x,
        var_trace_xi_x=float(var_xi_x),
        mean_trace_xixi=mean_xixi,
    )


def exact_dependent_moments(
    W, sched: NoiseSchedule, T: int, p: LagCoefficients
) -> MomentReport:
    """Exact mean/variance of tr(Xi X_xi^T) and mean of tr(X_xi X_xi^T).

    The one-lag pair (1, -1) takes the closed-form route (any T); other lag
    coefficients go through the dense block oracle and are size-guarded.
    """
    if T < 2:
        raise ValueError(f"T must be >= 2, got {T}")
    p = validate_lag_coeffs(p.p if isinstance(p, LagCoefficients) else p)
    if p.is_one_lag:
        return _one_lag_dependent_moments(W, sched, T)
    blocks = build_blocks(W, T, p)
    v, m4 = _stacked_moment_vectors(sched, blocks.n, T)
    mean_xi_x, var_xi_x = quadratic_form_moments(blocks.Q, v, m4)
    mean_xixi, _ = quadratic_form_moments(blocks.Q_tilde, v, m4)
    return MomentReport(
        mean_trace_xi_x=mean_xi_x,
        var_trace_xi_x=var_xi_x,
        mean_trace_xixi=mean_xixi,
    )


def dependent_moments_via_blocks(
    W, sched: NoiseSchedule, T: int, p: LagCoefficients
) -> MomentReport:
    """Dense-oracle route regardless of lag order (cross-check target)."""
    blocks = build_blocks(W, T, p)
    v, m4 = _stacked_moment_vectors(sched, blocks.n, T)
    mean_xi_x, var_xi_x = quadratic_form_moments(blocks.Q, v, m4)
    mean_xixi, _ = quadratic_form_moments(blocks.Q_tilde, v, m4)
    return MomentReport(
        mean_trace_xi_x=mean_xi_x,
        var_trace_xi_x=var_xi_x,
        mean_trace_xixi=mean_xixi,
    )


def exact_state_deviation_series(
    W, sched: NoiseSchedule, ts, p: LagCoefficients = INDEPENDENT
) -> np.ndarray:
    """``E ||x_t - x*_t||^2`` at each requested t, for the given noise kind.

    The deviation at time t is sum_{j<t} sigma_j^2 ||C_{t,j}||_F^2 where
    C_{t,j} collects the lag-weighted powers of W routing theta_j into x_t;
    for independent noise C_{t,j} = W^{t-j-1}, for one-lag noise the powers
    telescope into W^{t-j-1} - W^{t-j-2} plus the identity at j = t-1.
    """
    p = validate_lag_coeffs(p.p if isinstance(p, LagCoefficients) else p)
    ts = np.atleast_1d(np.asarray(ts, dtype=int))
    if np.any(ts < 1):
        raise ValueError("deviation times must be >= 1")
    t_max = int(ts.max())
    a = _lag_combo_norm_series(as_matrix(W), p, t_max)
    v = variances(sched, t_max)
    out = np.empty(ts.shape, dtype=float)
    for idx, t in enumerate(ts):
        # sum_{s=0}^{t-1} v_{t-1-s} a_s
        out[idx] = float(v[t - 1 :: -1][: t] @ a[:t])
    return out


def exact_state_deviation(
    W, sched: NoiseSchedule, t: int, p: LagCoefficients = INDEPENDENT
) -> float:
    """Scalar convenience wrapper around :func:`exact_state_deviation_series`."""
    return float(exact_state_deviation_series(W, sched, [t], p)[0])
