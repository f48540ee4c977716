"""Networked state evolution under injected noise.

Iterates ``x_{t+1} = W x_t + noise_t`` alongside the noise-free trajectory
``x*_{t+1} = W x*_t`` and tracks the squared deviation between the two.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, Overflow
from .graph import as_matrix
from .noise import NoiseMatrix

OVERFLOW_GUARD = 1e100


@dataclass(frozen=True)
class TrajectoryBundle:
    """States, shifted states, injected noise, and the ideal trajectory.

    ``states`` holds x_0..x_T (n x (T+1)); ``X`` and ``X_plus`` are views of
    its first and last T columns, matching the observation matrices used by
    the inference attack.
    """

    W: np.ndarray
    x0: np.ndarray
    states: np.ndarray
    ideal: np.ndarray
    noise: NoiseMatrix

    @property
    def n(self) -> int:
        return self.states.shape[0]

    @property
    def T(self) -> int:
        return self.states.shape[1] - 1

    @property
    def X(self) -> np.ndarray:
        """Observations x_0..x_{T-1}."""
        return self.states[:, :-1]

    @property
    def X_plus(self) -> np.ndarray:
        """Shifted observations x_1..x_T."""
        return self.states[:, 1:]

    def to_csv(self) -> str:
        """Columns: t, node_0..node_{n-1}, ideal_0..ideal_{n-1}; rows t = 0..T."""
        n = self.n
        header = (
            "t,"
            + ",".join(f"node_{i}" for i in range(n))
            + ","
            + ",".join(f"ideal_{i}" for i in range(n))
        )
        lines = [header]
        for t in range(self.T + 1):
            vals = [str(t)]
            vals += [f"{v:.17g}" for v in self.states[:, t]]
            vals += [f"{v:.17g}" for v in self.ideal[:, t]]
            lines.append(",".join(vals))
        return "\n".join(lines) + "\n"


def simulate(W, x0, noise: NoiseMatrix, T: int | None = None) -> TrajectoryBundle:
    """Run the noisy recursion for T steps and record the ideal trajectory.

    ``W`` may be a TopologyMatrix or a plain square array (experimental
    matrices with rho != 1 are allowed; states beyond 1e100 raise Overflow).
    The noise matrix must provide at least T columns; its kind (independent
    or lag-dependent) is carried through unchanged.
    """
    M = as_matrix(W)
    n = M.shape[0]
    if M.shape != (n, n):
        raise DimensionMismatch(f"W must be square, got {M.shape}")
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.shape != (n,):
        raise DimensionMismatch(f"x0 must have length {n}, got {x0.shape}")
    if T is None:
        T = noise.T
    if T < 2:
        raise ValueError(f"T must be >= 2, got {T}")
    if noise.values.shape[0] != n or noise.T < T:
        raise DimensionMismatch(
            f"noise must be {n} x >= {T}, got {noise.values.shape}"
        )

    states = np.empty((n, T + 1))
    ideal = np.empty((n, T + 1))
    states[:, 0] = x0
    ideal[:, 0] = x0
    guard_every = 64
    for t in range(T):
        states[:, t + 1] = M @ states[:, t] + noise.values[:, t]
        ideal[:, t + 1] = M @ ideal[:, t]
        if t % guard_every == 0 and np.abs(states[:, t + 1]).max() > OVERFLOW_GUARD:
            raise Overflow(f"state magnitude exceeded {OVERFLOW_GUARD:g} at step {t + 1}")
    if np.abs(states[:, T]).max() > OVERFLOW_GUARD:
        raise Overflow(f"state magnitude exceeded {OVERFLOW_GUARD:g} at step {T}")
    return TrajectoryBundle(W=M, x0=x0, states=states, ideal=ideal, noise=noise)


def deviation_series(traj: TrajectoryBundle) -> np.ndarray:
    """Squared Euclidean deviation from the ideal trajectory, t = 0..T."""
    diff = traj.states - traj.ideal
    return np.einsum("it,it->t", diff, diff)
