"""Desk-scale simulated experiments, reproducible from (config, seed).

Each runner returns an ExperimentReport: a flat table plus an echo of the
configuration and provenance, so a report can be re-run bit-identically
and emitted as CSV (plot-ready) or JSON (machine-readable).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .channel import (BathParams, GaussianParams, integrate_cov_ode, mu_of_t,
                      trajectory, validate_bath)
from .errors import DegenerateSampleError
from .estimation import (THREE_QUADRATURE_PHASES, moments_from_q,
                         purity_from_moments, purity_from_q,
                         purity_from_three_quadratures)
from .sampling import sample_homodyne, sample_q
from .states import GaussianState, purity

EXPERIMENTS = ("fig_varnx", "fig_trequad", "fig_varr", "fig_varnth",
               "evolution_r0_sweep", "evolution_time", "ratio_check")

# Fig. 1/2 state: strongly squeezed thermal state with true purity 0.5.
DEFAULT_STATE = GaussianParams(nbar=0.5, r=1.5, phi=0.0)

DEFAULT_N_GRID = [1_000, 3_000, 10_000, 30_000, 100_000]
DEFAULT_R_GRID = [0.0, 0.5, 1.0, 1.5, 2.0]
DEFAULT_NBAR_GRID = [0.1, 0.5, 1.0, 2.0, 4.0]
DEFAULT_T_GRID = [0.1 * k for k in range(51)]

VARR_N = 30_000
VARNTH_N = 10_000

# Inputs of the time-evolution figure: coherent, squeezed vacuum, hot thermal.
EVOLUTION_INPUTS = (("coherent", GaussianParams()),
                    ("squeezed", GaussianParams(r=1.5)),
                    ("thermal", GaussianParams(nbar=9.5)))

ODE_ORACLE_STEP = 5e-3


@dataclass
class ExperimentConfig:
    experiment: str
    state: GaussianParams = field(default_factory=lambda: DEFAULT_STATE)
    bath: Optional[BathParams] = None
    n_grid: Optional[list] = None
    r_grid: Optional[list] = None
    nbar_grid: Optional[list] = None
    t_grid: Optional[list] = None
    trials: int = 1
    seed: int = 0
    resamples: int = 400
    level: float = 0.68
    output_path: str = ""

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; "
                             f"choose one of {EXPERIMENTS}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        for name in ("n_grid", "r_grid", "nbar_grid", "t_grid"):
            grid = getattr(self, name)
            if grid is not None:
                grid = list(grid)
                if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
                    raise ValueError(f"{name} must be non-empty and strictly "
                                     f"ascending, got {grid}")
                setattr(self, name, grid)

    def to_dict(self) -> dict:
        d = {"experiment": self.experiment,
             "state": {"x0": self.state.x0, "p0": self.state.p0,
                       "nbar": self.state.nbar, "r": self.state.r,
                       "phi": self.state.phi},
             "bath": None, "n_grid": self.n_grid, "r_grid": self.r_grid,
             "nbar_grid": self.nbar_grid, "t_grid": self.t_grid,
             "trials": self.trials, "seed": self.seed,
             "resamples": self.resamples, "level": self.level,
             "output_path": self.output_path}
        if self.bath is not None:
            d["bath"] = {"gamma": self.bath.gamma, "N": self.bath.N,
                         "M1": self.bath.M1, "M2": self.bath.M2}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if d.get("state") is not None:
            d["state"] = GaussianParams(**d["state"])
        else:
            d.pop("state", None)
        if d.get("bath") is not None:
            d["bath"] = BathParams(**d["bath"])
        return cls(**d)


@dataclass
class ExperimentReport:
    experiment: str
    columns: list
    rows: list                 # list of dicts keyed by column name
    config: dict
    provenance: dict

    def to_dict(self) -> dict:
        return {"experiment": self.experiment, "columns": self.columns,
                "rows": self.rows, "config": self.config,
                "provenance": self.provenance}


def _provenance(config: ExperimentConfig) -> dict:
    return {"library_version": __version__, "seed": config.seed}


def _trial_rngs(config: ExperimentConfig, grid_len: int):
    children = np.random.SeedSequence(config.seed).spawn(grid_len * config.trials)
    rngs = [np.random.Generator(np.random.Philox(c)) for c in children]
    return [rngs[i * config.trials:(i + 1) * config.trials]
            for i in range(grid_len)]


def _summarize(estimates, cis):
    """Point value and error bars for one grid point.

    trials = 1: the bootstrap CI of the single estimate.
    trials > 1: mean +/- across-trial standard deviation.
    """
    est = np.asarray(estimates)
    if est.size == 1:
        if cis:
            return float(est[0]), cis[0][0], cis[0][1]
        return float(est[0]), math.nan, math.nan
    m, s = float(est.mean()), float(est.std(ddof=1))
    return m, m - s, m + s


def run_fig_varnx(config: ExperimentConfig) -> ExperimentReport:
    """Q-method purity estimate versus the number of data."""
    n_grid = config.n_grid or DEFAULT_N_GRID
    state = GaussianState.from_params(config.state)
    mu_true = purity(state.cov)
    columns = ["n", "mu_hat", "err_low", "err_high", "mu_true", "rel_err",
               "n_degenerate"]
    rows = []
    for n, rngs in zip(n_grid, _trial_rngs(config, len(n_grid))):
        estimates, cis = [], []
        degenerate = 0
        for rng in rngs:
            batch = sample_q(state, int(n), rng)
            try:
                if config.trials == 1:
                    pe = purity_from_q(batch, resamples=config.resamples,
                                       level=config.level, seed=rng)
                    estimates.append(pe.mu_hat)
                    cis.append((pe.ci_low, pe.ci_high))
                else:
                    estimates.append(purity_from_moments(moments_from_q(batch)))
            except DegenerateSampleError:
                degenerate += 1
        if estimates:
            mu_hat, lo, hi = _summarize(estimates, cis)
            rel = float(np.mean([abs(e - mu_true) / mu_true for e in estimates]))
        else:
            mu_hat = lo = hi = rel = math.nan
        rows.append(dict(zip(columns, [int(n), mu_hat, lo, hi, mu_true, rel,
                                       degenerate])))
    return ExperimentReport("fig_varnx", columns, rows, config.to_dict(),
                            _provenance(config))


def run_fig_trequad(config: ExperimentConfig) -> ExperimentReport:
    """Three-quadrature estimate versus the number of data.

    n is the total budget, split as n//3 detections per quadrature.
    Degenerate trials are flagged in their own column, never dropped
    silently.
    """
    n_grid = config.n_grid or DEFAULT_N_GRID
    state = GaussianState.from_params(config.state)
    mu_true = purity(state.cov)
    columns = ["n", "mu_hat", "err_low", "err_high", "mu_true", "bias",
               "n_degenerate"]
    rows = []
    for n, rngs in zip(n_grid, _trial_rngs(config, len(n_grid))):
        m = max(2, int(n) // 3)
        estimates, cis = [], []
        degenerate = 0
        for rng in rngs:
            batches = [sample_homodyne(state, th, m, rng)
                       for th in THREE_QUADRATURE_PHASES]
            try:
                variances = [float(np.var(b.values, ddof=1)) for b in batches]
                estimates.append(purity_from_three_quadratures(*variances))
                cis.append((math.nan, math.nan))
            except DegenerateSampleError:
                degenerate += 1
        if estimates:
            mu_hat, lo, hi = _summarize(estimates, cis)
            bias = float(np.mean(estimates)) - mu_true
        else:
            mu_hat = lo = hi = bias = math.nan
        rows.append(dict(zip(columns, [int(n), mu_hat, lo, hi, mu_true, bias,
                                       degenerate])))
    return ExperimentReport("fig_trequad", columns, rows, config.to_dict(),
                            _provenance(config))


def _q_sweep(config: ExperimentConfig, grid, grid_name, make_state, n_data):
    columns = [grid_name, "mu_hat", "err_low", "err_high", "mu_true",
               "rel_err", "n_degenerate"]
    rows = []
    for value, rngs in zip(grid, _trial_rngs(config, len(grid))):
        state = GaussianState.from_params(make_state(value))
        mu_true = purity(state.cov)
        estimates, cis = [], []
        degenerate = 0
        for rng in rngs:
            batch = sample_q(state, n_data, rng)
            try:
                if config.trials == 1:
                    pe = purity_from_q(batch, resamples=config.resamples,
                                       level=config.level, seed=rng)
                    estimates.append(pe.mu_hat)
                    cis.append((pe.ci_low, pe.ci_high))
                else:
                    estimates.append(purity_from_moments(moments_from_q(batch)))
            except DegenerateSampleError:
                degenerate += 1
        if estimates:
            mu_hat, lo, hi = _summarize(estimates, cis)
            rel = float(np.mean([abs(e - mu_true) / mu_true for e in estimates]))
        else:
            mu_hat = lo = hi = rel = math.nan
        rows.append(dict(zip(columns, [float(value), mu_hat, lo, hi, mu_true,
                                       rel, degenerate])))
    return columns, rows


def run_fig_varr(config: ExperimentConfig) -> ExperimentReport:
    """Q-method estimate versus squeezing at fixed nbar, N_x = 3*10^4."""
    grid = config.r_grid or DEFAULT_R_GRID
    base = config.state
    make = lambda r: GaussianParams(x0=base.x0, p0=base.p0, nbar=base.nbar,
                                    r=float(r), phi=base.phi)
    columns, rows = _q_sweep(config, grid, "r", make, VARR_N)
    return ExperimentReport("fig_varr", columns, rows, config.to_dict(),
                            _provenance(config))


def run_fig_varnth(config: ExperimentConfig) -> ExperimentReport:
    """Q-method estimate versus nbar at fixed r = 1.0, N_x = 10^4."""
    grid = config.nbar_grid or DEFAULT_NBAR_GRID
    base = config.state
    r = base.r if base.r != DEFAULT_STATE.r else 1.0
    make = lambda nb: GaussianParams(x0=base.x0, p0=base.p0, nbar=float(nb),
                                     r=r, phi=base.phi)
    columns, rows = _q_sweep(config, grid, "nbar", make, VARNTH_N)
    return ExperimentReport("fig_varnth", columns, rows, config.to_dict(),
                            _provenance(config))


def _ode_residual(params: GaussianParams, bath: BathParams, t: float) -> float:
    integrated = integrate_cov_ode(GaussianState.from_params(params), bath, t,
                                   step=ODE_ORACLE_STEP)
    return abs(mu_of_t(params, bath, t) - purity(integrated.cov))


def run_evolution(config: ExperimentConfig) -> ExperimentReport:
    """Noisy-channel evolution experiments (analytic + RK4 oracle).

    evolution_time     purity/squeezing trajectories of the three
                       reference inputs in the config bath (default
                       N = 0.5 thermal), with the ODE-oracle residual.
    evolution_r0_sweep purity at gamma*t = 1 versus initial squeezing,
                       for thermal baths N in {0, 0.5, 1}.
    ratio_check        closed-form ratio of squeezed (r0 = 1.5) to
                       coherent input purity at gamma*t = 1 in the
                       N = 1 thermal bath.
    """
    if config.experiment == "evolution_time":
        bath = validate_bath(config.bath or BathParams(N=0.5))
        t_grid = config.t_grid or DEFAULT_T_GRID
        columns = ["input", "gamma_t", "mu", "r", "phi", "ode_residual"]
        rows = []
        for label, params in EVOLUTION_INPUTS:
            traj = trajectory(params, bath, np.asarray(t_grid) / bath.gamma)
            for gt, mu, r, phi in zip(traj.times, traj.mus, traj.rs, traj.phis):
                res = _ode_residual(params, bath, gt / bath.gamma)
                rows.append(dict(zip(columns,
                                     [label, float(gt), float(mu), float(r),
                                      float(phi), res])))
        return ExperimentReport("evolution_time", columns, rows,
                                config.to_dict(), _provenance(config))

    if config.experiment == "evolution_r0_sweep":
        r_grid = config.r_grid or [0.1 * k for k in range(21)]
        columns = ["N", "r0", "mu"]
        rows = []
        for n_bath in (0.0, 0.5, 1.0):
            bath = BathParams(N=n_bath)
            for r0 in r_grid:
                mu = mu_of_t(GaussianParams(r=float(r0)), bath, 1.0 / bath.gamma)
                rows.append(dict(zip(columns, [n_bath, float(r0), mu])))
        return ExperimentReport("evolution_r0_sweep", columns, rows,
                                config.to_dict(), _provenance(config))

    if config.experiment == "ratio_check":
        bath = validate_bath(config.bath or BathParams(N=1.0))
        t = 1.0 / bath.gamma
        mu_sq = mu_of_t(GaussianParams(r=1.5), bath, t)
        mu_coh = mu_of_t(GaussianParams(), bath, t)
        columns = ["gamma_t", "mu_squeezed", "mu_coherent", "ratio"]
        rows = [dict(zip(columns, [1.0, mu_sq, mu_coh, mu_sq / mu_coh]))]
        return ExperimentReport("ratio_check", columns, rows, config.to_dict(),
                                _provenance(config))

    raise ValueError(f"{config.experiment!r} is not an evolution experiment")


_RUNNERS = {"fig_varnx": run_fig_varnx,
            "fig_trequad": run_fig_trequad,
            "fig_varr": run_fig_varr,
            "fig_varnth": run_fig_varnth,
            "evolution_time": run_evolution,
            "evolution_r0_sweep": run_evolution,
            "ratio_check": run_evolution}


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    return _RUNNERS[config.experiment](config)


def emit(report: ExperimentReport, path, fmt: str = "csv"):
    """Write a report as CSV (rows only) or JSON (full report)."""
    try:
        if fmt == "csv":
            with open(path, "w", newline="") as fh:
                writer = csv.DictWriter(fh, fieldnames=report.columns)
                writer.writeheader()
                writer.writerows(report.rows)
        elif fmt == "json":
            with open(path, "w") as fh:
                json.dump(report.to_dict(), fh, indent=2)
                fh.write("\n")
        else:
            raise ValueError(f"unknown format {fmt!r}; use 'csv' or 'json'")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
