"""Directed-network weight matrices and their spectral properties.

Nodes average their in-neighbors' states through a row-stochastic weight
matrix ``W``.  An edge ``(i, j)`` means node ``i`` uses information sent by
node ``j``, so information flows ``j -> i``.  Weights follow the Laplacian
rule ``W[i, j] = gamma * a_ij / d_max`` off the diagonal, with the diagonal
absorbing the remainder so each row sums to one.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import EigenFailure, EmptyGraph, InvalidGamma, SpanningTreeUnreachable

ROW_SUM_TOL = 1e-12
EIGEN_MODULUS_TOL = 1e-9

# Rejection-sampling budget for random_digraph before giving up.
_MAX_SPANNING_TREE_DRAWS = 64


@dataclass(frozen=True)
class Adjacency:
    """Directed graph as an ordered-pair edge set.

    Edge ``(i, j)`` means node ``i`` listens to node ``j``.  Self-loops are
    rejected; indices must lie in ``[0, n)``.
    """

    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"node count must be positive, got {self.n}")
        object.__setattr__(self, "edges", frozenset(tuple(e) for e in self.edges))
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-loop ({i}, {i}) not allowed")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) outside [0, {self.n})")

    def in_degrees(self) -> np.ndarray:
        """Number of in-neighbors (nodes listened to) per node."""
        deg = np.zeros(self.n, dtype=int)
        for i, _ in self.edges:
            deg[i] += 1
        return deg

    def to_text(self) -> str:
        """Serialize as edge-list text: ``n=<int>`` then one ``i j`` per line."""
        lines = [f"n={self.n}"]
        lines.extend(f"{i} {j}" for i, j in sorted(self.edges))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Adjacency":
        """Parse the edge-list format produced by :meth:`to_text`."""
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("n="):
            raise ValueError("adjacency text must start with 'n=<int>'")
        n = int(lines[0][2:])
        edges = set()
        for ln in lines[1:]:
            i, j = ln.split()
            edges.add((int(i), int(j)))
        return cls(n=n, edges=frozenset(edges))


@dataclass(frozen=True)
class TopologyMatrix:
    """Row-stochastic weight matrix with its construction parameters.

    ``gamma`` and ``d_max`` are ``None`` for matrices not built by the
    Laplacian rule (e.g. hand-constructed test matrices).
    """

    n: int
    W: np.ndarray
    gamma: float | None = None
    d_max: int | None = None

    def __post_init__(self):
        W = np.asarray(self.W, dtype=float)
        object.__setattr__(self, "W", W)
        if W.shape != (self.n, self.n):
            raise ValueError(f"W must be {self.n}x{self.n}, got {W.shape}")
        if np.any(W < -ROW_SUM_TOL) or np.any(W > 1 + ROW_SUM_TOL):
            raise ValueError("entries must lie in [0, 1]")
        row_sums = W.sum(axis=1)
        if np.any(np.abs(row_sums - 1.0) > ROW_SUM_TOL):
            worst = float(np.abs(row_sums - 1.0).max())
            raise ValueError(f"rows must sum to 1 within {ROW_SUM_TOL}, worst error {worst:.3e}")

    def to_csv(self) -> str:
        """Serialize as CSV, one row per line, full float precision."""
        return "\n".join(",".join(f"{v:.17g}" for v in row) for row in self.W) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "TopologyMatrix":
        rows = [
            [float(v) for v in ln.split(",")]
            for ln in text.splitlines()
            if ln.strip()
        ]
        W = np.array(rows, dtype=float)
        return cls(n=W.shape[0], W=W)


@dataclass(frozen=True)
class SpectralSummary:
    """Eigenvalue moduli of a weight matrix, sorted descending."""

    eigen_moduli: np.ndarray
    spectral_radius: float
    leading_is_simple: bool


def as_matrix(W) -> np.ndarray:
    """Accept a TopologyMatrix or a plain array and return the ndarray."""
    if isinstance(W, TopologyMatrix):
        return W.W
    return np.asarray(W, dtype=float)


def laplacian_weights(adj: Adjacency, gamma: float = 0.5) -> TopologyMatrix:
    """Build the row-stochastic weight matrix by the Laplacian rule.

    Off-diagonal weights are ``gamma / d_max`` on edges; each diagonal entry
    absorbs the remainder of its row.  ``gamma < 1`` keeps every diagonal
    entry >= 1 - gamma > 0, which (with a spanning tree) makes the matrix
    primitive; ``gamma = 1`` is allowed but a warning is issued when the
    leading eigenvalue ends up non-simple.

    Raises
    ------
    InvalidGamma
        If gamma is outside (0, 1].
    EmptyGraph
        If n >= 2 and the maximum in-degree is zero.
    """
    if not (0.0 < gamma <= 1.0):
        raise InvalidGamma(f"gamma must be in (0, 1], got {gamma}")
    deg = adj.in_degrees()
    d_max = int(deg.max()) if adj.n else 0
    if d_max == 0:
        if adj.n >= 2:
            raise EmptyGraph("n >= 2 with no edges: Laplacian rule divides by d_max = 0")
        return TopologyMatrix(n=1, W=np.ones((1, 1)), gamma=gamma, d_max=0)

    W = np.zeros((adj.n, adj.n))
    for i, j in adj.edges:
        W[i, j] = gamma / d_max
    np.fill_diagonal(W, 1.0 - W.sum(axis=1))
    topo = TopologyMatrix(n=adj.n, W=W, gamma=gamma, d_max=d_max)
    if gamma == 1.0 and not spectral_summary(topo).leading_is_simple:
        warnings.warn(
            "gamma = 1 produced a non-primitive weight matrix "
            "(leading eigenvalue is not simple); use gamma < 1 for "
            "guaranteed convergence",
            stacklevel=2,
        )
    return topo


def has_spanning_tree(adj: Adjacency) -> bool:
    """True iff some node's information reaches every other node.

    Edge ``(i, j)`` carries information ``j -> i``; we BFS over those flow
    arcs from each candidate root.
    """
    if adj.n == 1:
        return True
    flow_out: list[list[int]] = [[] for _ in range(adj.n)]
    for i, j in adj.edges:
        flow_out[j].append(i)
    for root in range(adj.n):
        seen = bytearray(adj.n)
        seen[root] = 1
        queue = deque([root])
        count = 1
        while queue:
            u = queue.popleft()
            for v in flow_out[u]:
                if not seen[v]:
                    seen[v] = 1
                    count += 1
                    queue.append(v)
        if count == adj.n:
            return True
    return False


def random_digraph(n: int, edge_prob: float, seed: int) -> Adjacency:
    """Directed Erdos-Renyi graph, rejection-sampled until a spanning tree exists.

    Each ordered pair (i, j), i != j, is included independently with
    probability ``edge_prob``.  Deterministic for fixed (n, edge_prob, seed).

    Raises
    ------
    SpanningTreeUnreachable
        After 64 consecutive draws without a spanning tree.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if not (0.0 < edge_prob <= 1.0):
        raise ValueError(f"edge_prob must be in (0, 1], got {edge_prob}")
    rng = np.random.default_rng(seed)
    for _ in range(_MAX_SPANNING_TREE_DRAWS):
        mask = rng.random((n, n)) < edge_prob
        np.fill_diagonal(mask, False)
        edges = frozenset(zip(*np.nonzero(mask)))
        adj = Adjacency(n=n, edges=frozenset((int(i), int(j)) for i, j in edges))
        if has_spanning_tree(adj):
            return adj
    raise SpanningTreeUnreachable(
        f"no spanning tree in {_MAX_SPANNING_TREE_DRAWS} draws "
        f"(n={n}, edge_prob={edge_prob}); increase edge_prob"
    )


def spectral_summary(W) -> SpectralSummary:
    """Full dense eigenvalue summary of a weight matrix.

    ``leading_is_simple`` is true when exactly one eigenvalue modulus lies
    within 1e-9 of the spectral radius.
    """
    M = as_matrix(W)
    try:
        eigvals = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(f"eigenvalue solver failed: {exc}") from exc
    moduli = np.sort(np.abs(eigvals))[::-1]
    rho = float(moduli[0])
    leading = int(np.sum(moduli > rho - EIGEN_MODULUS_TOL)) == 1
    return SpectralSummary(eigen_moduli=moduli, spectral_radius=rho, leading_is_simple=leading)
