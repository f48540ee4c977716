"""OLS topology-inference attack and its error norms.

The adversary fits next-state on current-state observations:
``W_hat = X_plus X^T (X X^T)^{-1}``, solved through the normal equations of
the symmetric Gram matrix rather than an explicit inverse.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .dynamics import TrajectoryBundle
from .errors import DimensionMismatch, SingularGram
from .graph import as_matrix

GRAM_CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class InferenceResult:
    """Estimated topology with error norms and Gram conditioning."""

    W_hat: np.ndarray
    error_spectral: float | None
    error_frobenius: float | None
    gram_condition: float
    T_used: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "W_hat": self.W_hat.tolist(),
                "error_spectral": self.error_spectral,
                "error_frobenius": self.error_frobenius,
                "gram_condition": self.gram_condition,
                "T_used": self.T_used,
            },
            indent=2,
        )


def _solve_normal_equations(X: np.ndarray, X_plus: np.ndarray):
    """Return (W_hat, condition number of X X^T); raises SingularGram."""
    n, T = X.shape
    if X_plus.shape != (n, T):
        raise DimensionMismatch(f"X and X_plus shapes differ: {X.shape} vs {X_plus.shape}")
    if T < n:
        raise SingularGram(f"T = {T} observations cannot identify an n = {n} system")
    gram = X @ X.T
    eigs = np.linalg.eigvalsh(gram)
    if eigs[-1] <= 0 or eigs[0] <= 0:
        raise SingularGram("Gram matrix is not positive definite")
    cond = float(eigs[-1] / eigs[0])
    if cond > GRAM_CONDITION_LIMIT:
        raise SingularGram(f"Gram condition number {cond:.3e} exceeds {GRAM_CONDITION_LIMIT:g}")
    try:
        What_T = scipy.linalg.solve(gram, X @ X_plus.T, assume_a="pos")
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - guarded by cond check
        raise SingularGram(f"normal-equation solve failed: {exc}") from exc
    return What_T.T, cond


def ols_estimate(traj: TrajectoryBundle, attack_T: int | None = None) -> InferenceResult:
    """OLS estimate of the topology from a trajectory's first ``attack_T`` steps.

    ``attack_T`` defaults to the full trajectory length; passing a smaller
    value reuses one long simulation for a whole observation-count sweep
    (the prefix is exactly what a shorter run would have produced).
    """
    T = traj.T if attack_T is None else attack_T
    if not 2 <= T <= traj.T:
        raise ValueError(f"attack_T must be in [2, {traj.T}], got {T}")
    X = traj.states[:, :T]
    X_plus = traj.states[:, 1 : T + 1]
    W_hat, cond = _solve_normal_equations(X, X_plus)
    spectral, frobenius = inference_error(W_hat, traj.W)
    return InferenceResult(
        W_hat=W_hat,
        error_spectral=spectral,
        error_frobenius=frobenius,
        gram_condition=cond,
        T_used=T,
    )


def ols_estimate_matrices(X: np.ndarray, X_plus: np.ndarray, W_true=None) -> InferenceResult:
    """OLS on raw observation matrices; errors filled only if W_true given."""
    W_hat, cond = _solve_normal_equations(np.asarray(X, float), np.asarray(X_plus, float))
    spectral = frobenius = None
    if W_true is not None:
        spectral, frobenius = inference_error(W_hat, W_true)
    return InferenceResult(
        W_hat=W_hat,
        error_spectral=spectral,
        error_frobenius=frobenius,
        gram_condition=cond,
        T_used=X.shape[1],
    )


def inference_error(W_hat, W) -> tuple[float, float]:
    """Spectral and Frobenius norms of the estimation error ``W_hat - W``."""
    A = as_matrix(W_hat)
    B = as_matrix(W)
    if A.shape != B.shape:
        raise DimensionMismatch(f"shape mismatch: {A.shape} vs {B.shape}")
    diff = A - B
    return float(np.linalg.norm(diff, 2)), float(np.linalg.norm(diff, "fro"))
