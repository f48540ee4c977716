"""Config-driven Monte Carlo experiment runner.

Reproduces the error-decay and state-deviation figures: for each variance
decay power and each observation count, run seeded trials of the noisy
dynamics, mount the OLS attack, and average the error norms.  Oracle metric
values and fitted log-log slopes are attached per decay power.  Outputs are
deterministic for a fixed config (trial seeds are base_seed + trial index,
and one long simulation per trial serves every observation count through
prefix reuse).
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from . import __version__ as _version
from .dynamics import deviation_series, simulate
from .errors import (
    ConfigInvalid,
    InsufficientPoints,
    NonPositiveValue,
    SingularGram,
    TooLarge,
)
from .graph import TopologyMatrix, as_matrix, laplacian_weights, random_digraph
from .inference import ols_estimate
from .metrics import fit_decay_exponent, r_theta_curve, r_xi
from .moments import BLOCK_SIZE_GUARD
from .noise import (
    INDEPENDENT,
    LagCoefficients,
    NoiseSchedule,
    PolynomialDecay,
    derive_dependent,
    sample_independent,
    validate_lag_coeffs,
)

FAIL_FRACTION_LIMIT = 0.10
DEVIATION_CHECKPOINTS = 64

_CONFIG_SCHEMA = {
    # graph: either generated (n, edge_prob, gamma, graph_seed) or explicit file
    "n": int,
    "edge_prob": float,
    "gamma": float,
    "graph_seed": int,
    "w_file": str,
    # noise
    "sigma0_sq": float,
    "alphas": "float_list",
    "distribution": str,
    "lag_coeffs": "float_list",
    # observation grid: explicit list or log-spaced range
    "t_grid": "int_list",
    "t_min": int,
    "t_max": int,
    "t_points": int,
    # run control
    "trials": int,
    "x0_mode": str,
    "x0_file": str,
    "c_sigma": float,
    "out_dir": str,
    "base_seed": int,
}


@dataclass
class ExperimentConfig:
    """Validated experiment description; see ``parse_config`` for the file format."""

    n: int = 7
    edge_prob: float = 0.4
    gamma: float = 0.5
    graph_seed: int = 42
    w_file: str | None = None
    sigma0_sq: float = 1.0
    alphas: tuple = (0.0,)
    distribution: str = "gaussian"
    lag_coeffs: tuple = ()  # empty = independent noise
    t_grid: tuple = ()
    t_min: int = 100
    t_max: int = 10_000
    t_points: int = 16
    trials: int = 20
    x0_mode: str = "uniform01"
    x0_file: str | None = None
    c_sigma: float = 3.0
    out_dir: str = "out"
    base_seed: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigInvalid(f"trials must be >= 1, got {self.trials}")
        if self.x0_mode not in ("zero", "uniform01", "file"):
            raise ConfigInvalid(f"unknown x0_mode {self.x0_mode!r}")
        if self.x0_mode == "file" and not self.x0_file:
            raise ConfigInvalid("x0_mode = file requires x0_file")
        if any(a < 0 for a in self.alphas):
            raise ConfigInvalid("all alphas must be >= 0")
        grid = self.resolved_t_grid()
        if len(grid) < 1 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigInvalid("T grid must be non-empty and strictly increasing")
        if grid[0] < 2:
            raise ConfigInvalid("all T must be >= 2")
        if self.lag_coeffs:
            validate_lag_coeffs(self.lag_coeffs)

    def resolved_t_grid(self) -> tuple:
        if self.t_grid:
            return tuple(int(t) for t in self.t_grid)
        pts = np.unique(
            np.round(
                np.logspace(np.log10(self.t_min), np.log10(self.t_max), self.t_points)
            ).astype(int)
        )
        return tuple(int(t) for t in pts)

    def lag(self) -> LagCoefficients:
        return validate_lag_coeffs(self.lag_coeffs) if self.lag_coeffs else INDEPENDENT

    def canonical_text(self) -> str:
        d = asdict(self)
        return json.dumps(d, sort_keys=True, default=list)

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()[:16]


def parse_config(text: str) -> ExperimentConfig:
    """Parse flat ``key = value`` config text (lower_snake_case keys,
    comma-separated lists, ``#`` comments).  Unknown keys are errors."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigInvalid(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _CONFIG_SCHEMA:
            raise ConfigInvalid(f"line {lineno}: unknown key {key!r}")
        kind = _CONFIG_SCHEMA[key]
        try:
            if kind == "float_list":
                values[key] = tuple(float(v) for v in val.split(",") if v.strip())
            elif kind == "int_list":
                values[key] = tuple(int(v) for v in val.split(",") if v.strip())
            elif kind is int:
                values[key] = int(val)
            elif kind is float:
                values[key] = float(val)
            else:
                values[key] = val
        except ValueError as exc:
            raise ConfigInvalid(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    return ExperimentConfig(**values)


@dataclass
class CellResult:
    """Trial-averaged attack error at one (alpha, T) grid point."""

    alpha: float
    T: int
    mean_error: float | None
    stderr_error: float | None
    trials_ok: int
    trials_failed: int
    valid: bool
    oracle_r_theta: float | None = None
    oracle_r_xi_center: float | None = None
    oracle_r_xi_half_width: float | None = None


@dataclass
class ExperimentReport:
    """All per-cell results plus deviation summaries, rate fits, and metadata."""

    cells: list = field(default_factory=list)
    deviation: dict = field(default_factory=dict)  # alpha -> {"t": [...], "mean_sq": [...]}
    rate_fits: dict = field(default_factory=dict)  # alpha -> fit dict or None
    argmax_alpha_per_T: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def canonical_dict(self) -> dict:
        d = {
            "cells": [asdict(c) for c in self.cells],
            "deviation": self.deviation,
            "rate_fits": self.rate_fits,
            "argmax_alpha_per_T": self.argmax_alpha_per_T,
            "meta": {k: v for k, v in self.meta.items() if k != "wall_time_s"},
        }
        return d

    def canonical_json(self) -> str:
        """Deterministic serialization (timing excluded); replay-comparable."""
        return json.dumps(self.canonical_dict(), sort_keys=True, indent=2)

    def to_json(self) -> str:
        d = self.canonical_dict()
        d["meta"]["wall_time_s"] = self.meta.get("wall_time_s")
        return json.dumps(d, sort_keys=True, indent=2)


def resolve_topology(cfg: ExperimentConfig):
    """Weight matrix from the config: generated, or loaded from CSV.

    A loaded matrix that fails the row-stochastic invariants (scaled or
    explosive experimental matrices) is returned as a plain array; the
    simulation and attack operate on it unchanged.
    """
    if cfg.w_file:
        with open(cfg.w_file) as fh:
            text = fh.read()
        try:
            return TopologyMatrix.from_csv(text)
        except ValueError:
            rows = [[float(v) for v in ln.split(",")] for ln in text.splitlines() if ln.strip()]
            return np.array(rows, dtype=float)
    adj = random_digraph(cfg.n, cfg.edge_prob, cfg.graph_seed)
    return laplacian_weights(adj, cfg.gamma)


def resolve_x0(cfg: ExperimentConfig, n: int) -> np.ndarray:
    if cfg.x0_mode == "zero":
        return np.zeros(n)
    if cfg.x0_mode == "uniform01":
        return np.random.default_rng(cfg.base_seed).uniform(0.0, 1.0, n)
    vals = np.loadtxt(cfg.x0_file, delimiter=",", dtype=float).reshape(-1)
    if vals.shape != (n,):
        raise ConfigInvalid(f"x0 file must hold {n} values, got {vals.shape}")
    return vals


def _deviation_checkpoints(T: int) -> np.ndarray:
    pts = np.unique(
        np.round(np.logspace(0, np.log10(T), DEVIATION_CHECKPOINTS)).astype(int)
    )
    return pts


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Full grid run: per alpha and per T, trial-averaged attack errors.

    One simulation at the largest T per (alpha, trial) serves the whole T
    grid: noise is drawn t-major, so a prefix of the long run is exactly the
    short run with the same seed.  Gram failures are recorded per cell and a
    cell with more than 10% failed trials is marked invalid.
    """
    t_start = time.perf_counter()
    W = resolve_topology(cfg)
    n = as_matrix(W).shape[0]
    x0 = resolve_x0(cfg, n)
    t_grid = cfg.resolved_t_grid()
    T_max = t_grid[-1]
    lag = cfg.lag()
    dependent = not lag.is_identity

    report = ExperimentReport()
    check_ts = _deviation_checkpoints(T_max)

    for alpha in cfg.alphas:
        sched = NoiseSchedule(
            cfg.sigma0_sq, PolynomialDecay(alpha), distribution=cfg.distribution
        )
        errors = np.full((cfg.trials, len(t_grid)), np.nan)
        dev_sum = np.zeros(len(check_ts))
        for trial in range(cfg.trials):
            seed = cfg.base_seed + trial
            theta = sample_independent(sched, n, T_max, seed=seed)
            noise = derive_dependent(theta, lag) if dependent else theta
            traj = simulate(W, x0, noise, T_max)
            dev_sum += deviation_series(traj)[check_ts]
            for j, T in enumerate(t_grid):
                try:
                    errors[trial, j] = ols_estimate(traj, attack_T=T).error_spectral
                except SingularGram:
                    pass  # stays NaN; counted below

        oracle_theta = None
        if not dependent:
            oracle_theta = r_theta_curve(W, sched, np.array(t_grid))
        for j, T in enumerate(t_grid):
            col = errors[:, j]
            ok = np.isfinite(col)
            n_ok, n_fail = int(ok.sum()), int((~ok).sum())
            valid = n_fail <= FAIL_FRACTION_LIMIT * cfg.trials
            cell = CellResult(
                alpha=alpha,
                T=int(T),
                mean_error=float(col[ok].mean()) if n_ok else None,
                stderr_error=(
                    float(col[ok].std(ddof=1) / np.sqrt(n_ok)) if n_ok > 1 else None
                ),
                trials_ok=n_ok,
                trials_failed=n_fail,
                valid=valid,
            )
            if oracle_theta is not None:
                cell.oracle_r_theta = float(oracle_theta[j])
            elif lag.is_one_lag or n * T <= BLOCK_SIZE_GUARD:
                try:
                    iv = r_xi(W, sched, int(T), lag, cfg.c_sigma)
                    cell.oracle_r_xi_center = iv.center
                    cell.oracle_r_xi_half_width = iv.half_width
                except TooLarge:
                    pass
            report.cells.append(cell)

        report.deviation[str(alpha)] = {
            "t": [int(t) for t in check_ts],
            "mean_sq": [float(v) for v in dev_sum / cfg.trials],
        }
        curve = [
            (c.T, c.mean_error)
            for c in report.cells
            if c.alpha == alpha and c.valid and c.mean_error is not None
        ]
        try:
            fit = fit_decay_exponent(curve)
            report.rate_fits[str(alpha)] = {
                "exponent": fit.exponent,
                "stderr": fit.stderr,
                "r_squared": fit.r_squared,
                "points_used": fit.points_used,
            }
        except (InsufficientPoints, NonPositiveValue):
            report.rate_fits[str(alpha)] = None

    for T in t_grid:
        cands = [
            (c.mean_error, c.alpha)
            for c in report.cells
            if c.T == T and c.valid and c.mean_error is not None
        ]
        if cands:
            report.argmax_alpha_per_T[str(T)] = max(cands)[1]

    report.meta = {
        "config_hash": cfg.config_hash(),
        "config": json.loads(cfg.canonical_text()),
        "base_seed": cfg.base_seed,
        "package_version": _version,
        "wall_time_s": round(time.perf_counter() - t_start, 3),
    }
    return report


def sweep_alpha(cfg: ExperimentConfig) -> ExperimentReport:
    """Alpha-sweep wrapper: requires a wide grid (>= 5 points reaching into
    the upper decay range) and reports the argmax alpha per T."""
    if len(cfg.alphas) < 5 or min(cfg.alphas) > 1.0 or max(cfg.alphas) < 4.0:
        raise ConfigInvalid(
            "alpha sweep needs >= 5 grid points spanning the [0, 6] range"
        )
    return run_experiment(cfg)


def _csv_lines_errors(report: ExperimentReport) -> str:
    lines = ["alpha,T,mean_error,stderr_error,trials_ok"]
    for c in report.cells:
        mean = "" if c.mean_error is None else f"{c.mean_error:.17g}"
        se = "" if c.stderr_error is None else f"{c.stderr_error:.17g}"
        lines.append(f"{c.alpha:.17g},{c.T},{mean},{se},{c.trials_ok}")
    return "\n".join(lines) + "\n"


def _csv_lines_deviation(report: ExperimentReport) -> str:
    lines = ["alpha,t,mean_sq_deviation"]
    for alpha, series in report.deviation.items():
        for t, v in zip(series["t"], series["mean_sq"]):
            lines.append(f"{alpha},{t},{v:.17g}")
    return "\n".join(lines) + "\n"


def emit_outputs(report: ExperimentReport, formats=("csv", "json"), out_dir="out"):
    """Write report artifacts; returns the list of created paths.

    CSV uses '.' decimals, LF endings, mandatory header.  SVG emission is
    optional and uses log-log axes for error curves, log-x for deviation.
    """
    import os

    os.makedirs(out_dir, exist_ok=True)
    paths = []
    if "csv" in formats:
        for name, text in [
            ("errors.csv", _csv_lines_errors(report)),
            ("deviation.csv", _csv_lines_deviation(report)),
        ]:
            path = os.path.join(out_dir, name)
            with open(path, "w", newline="\n") as fh:
                fh.write(text)
            paths.append(path)
    if "json" in formats:
        path = os.path.join(out_dir, "report.json")
        with open(path, "w", newline="\n") as fh:
            fh.write(report.to_json())
        paths.append(path)
    if "svg" in formats:
        paths.extend(_emit_svg(report, out_dir))
    return paths


def _emit_svg(report: ExperimentReport, out_dir):
    import os

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    paths = []
    alphas = sorted({c.alpha for c in report.cells})
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for alpha in alphas:
        pts = [
            (c.T, c.mean_error)
            for c in report.cells
            if c.alpha == alpha and c.mean_error is not None
        ]
        if pts:
            Ts, vals = zip(*pts)
            ax.loglog(Ts, vals, marker="o", label=f"alpha={alpha:g}")
    ax.set_xlabel("observations T")
    ax.set_ylabel("mean spectral error")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    path = os.path.join(out_dir, "error_curves.svg")
    fig.savefig(path)
    plt.close(fig)
    paths.append(path)

    if report.deviation:
        fig, ax = plt.subplots(figsize=(6, 4.5))
        for alpha, series in report.deviation.items():
            ax.semilogx(series["t"], series["mean_sq"], label=f"alpha={alpha}")
        ax.set_xlabel("time t")
        ax.set_ylabel("mean squared deviation")
        ax.legend(fontsize=8)
        ax.grid(True, which="both", alpha=0.3)
        path = os.path.join(out_dir, "deviation.svg")
        fig.savefig(path)
        plt.close(fig)
        paths.append(path)
    return paths
