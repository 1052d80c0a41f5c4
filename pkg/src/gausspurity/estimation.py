"""Statistical recovery of purity from measurement records.

Two estimators are provided:

* the joint (Q-function) method: vacuum-corrected sample second moments
  give an estimate of the covariance matrix, and the purity follows from
  mu = 1/(2*sqrt(det sigma));
* the three-quadrature method: sample variances of x_theta at
  theta = 0, pi/4, pi/2 are plugged into
  mu = [4*v45*(v0 + v90 - v45) - (v0 - v90)^2]^{-1/2}.

Uncertainty is quantified by a nonparametric bootstrap (percentile
interval, 68% by default).  Degenerate point estimates -- negative
determinant or non-positive bracket -- raise DegenerateSampleError rather
than being clamped, since that unreliability is a real feature of the
homodyne method at small sample sizes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateSampleError, InsufficientDataError
from .sampling import HomodyneBatch, QSampleBatch, make_rng, sample_homodyne, sample_q
from .states import CovMatrix, GaussianState, purity

THREE_QUADRATURE_PHASES = (0.0, math.pi / 4.0, math.pi / 2.0)

_BOOT_CHUNK_ELEMS = 2_000_000


class EstimationMethod(str, Enum):
    Q_JOINT = "q_joint"
    THREE_QUADRATURE = "three_quadrature"


@dataclass(frozen=True)
class MomentEstimate:
    """Sample means and vacuum-corrected second moments from Q-data."""

    mean_x: float
    mean_p: float
    sxx_hat: float
    spp_hat: float
    sxp_hat: float

    @property
    def cov(self) -> CovMatrix:
        return CovMatrix(sxx=self.sxx_hat, spp=self.spp_hat, sxp=self.sxp_hat)


@dataclass(frozen=True)
class PurityEstimate:
    """Point estimate of purity with a bootstrap confidence interval."""

    mu_hat: float
    ci_low: float
    ci_high: float
    level: float
    n: int
    method: EstimationMethod

    def to_dict(self) -> dict:
        return {"method": self.method.value, "mu_hat": self.mu_hat,
                "ci_low": self.ci_low, "ci_high": self.ci_high,
                "level": self.level, "n": self.n}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def moments_from_q(batch: QSampleBatch) -> MomentEstimate:
    """Estimate first and second moments of the state from Q-samples.

    The Q-function carries one extra vacuum unit of noise in each
    quadrature, so 1/2 is subtracted from the sample variances; the
    cross moment needs no correction.  Unbiased (n-1) estimators are
    used throughout.
    """
    if batch.n < 2:
        raise InsufficientDataError(f"need at least 2 Q-samples, got {batch.n}")
    c = np.cov(batch.pairs, rowvar=False, ddof=1)
    return MomentEstimate(mean_x=float(batch.x.mean()), mean_p=float(batch.p.mean()),
                          sxx_hat=float(c[0, 0]) - 0.5,
                          spp_hat=float(c[1, 1]) - 0.5,
                          sxp_hat=float(c[0, 1]))


def purity_from_moments(m: MomentEstimate) -> float:
    """Plug-in purity from estimated moments; exact on analytic input."""
    det = m.sxx_hat * m.spp_hat - m.sxp_hat**2
    if m.sxx_hat <= 0 or m.spp_hat <= 0 or det <= 0:
        raise DegenerateSampleError(
            f"estimated covariance has non-positive determinant {det}; "
            "too few data for this state")
    return 1.0 / (2.0 * math.sqrt(det))


def _bootstrap_q(pairs: np.ndarray, resamples: int, rng: np.random.Generator) -> np.ndarray:
    """Purity of bootstrap resamples of a Q-batch; degenerate ones dropped."""
    n = pairs.shape[0]
    x, p = pairs[:, 0], pairs[:, 1]
    out = []
    left = resamples
    chunk = max(1, _BOOT_CHUNK_ELEMS // n)
    while left > 0:
        k = min(chunk, left)
        left -= k
        idx = rng.integers(0, n, size=(k, n))
        xs, ps = x[idx], p[idx]
        mx, mp = xs.mean(axis=1), ps.mean(axis=1)
        sxx = ((xs * xs).sum(axis=1) - n * mx * mx) / (n - 1) - 0.5
        spp = ((ps * ps).sum(axis=1) - n * mp * mp) / (n - 1) - 0.5
        sxp = ((xs * ps).sum(axis=1) - n * mx * mp) / (n - 1)
        det = sxx * spp - sxp * sxp
        ok = (sxx > 0) & (spp > 0) & (det > 0)
        out.append(0.5 / np.sqrt(det[ok]))
    return np.concatenate(out)


def _percentile_ci(samples: np.ndarray, point: float, level: float):
    lo, hi = np.quantile(samples, [(1.0 - level) / 2.0, (1.0 + level) / 2.0])
    return min(float(lo), point), max(float(hi), point)


def purity_from_q(batch: QSampleBatch, resamples: int = 400,
                  level: float = 0.68, seed=0) -> PurityEstimate:
    """Purity estimate from a Q-batch with a bootstrap percentile CI."""
    if batch.n < 3:
        raise InsufficientDataError(f"need at least 3 Q-samples, got {batch.n}")
    if not 0.0 < level < 1.0:
        raise ValueError(f"confidence level must lie in (0, 1), got {level}")
    point = purity_from_moments(moments_from_q(batch))
    mus = _bootstrap_q(batch.pairs, resamples, make_rng(seed))
    if mus.size < max(2, resamples // 2):
        raise DegenerateSampleError(
            f"only {mus.size}/{resamples} bootstrap resamples were physical")
    lo, hi = _percentile_ci(mus, point, level)
    return PurityEstimate(mu_hat=point, ci_low=lo, ci_high=hi, level=level,
                          n=batch.n, method=EstimationMethod.Q_JOINT)


def purity_from_three_quadratures(var0: float, var45: float, var90: float) -> float:
    """Purity from the variances of x_0, x_{pi/4}, x_{pi/2}.

    Exact when fed analytic variances; with sample variances the bracket
    can go non-positive, which raises DegenerateSampleError.
    """
    bracket = 4.0 * var45 * (var0 + var90 - var45) - (var0 - var90) ** 2
    if bracket <= 0:
        raise DegenerateSampleError(
            f"three-quadrature bracket is non-positive ({bracket}); "
            "the homodyne method is not statistically reliable here")
    return bracket**-0.5


def _check_phase(batch: HomodyneBatch, expected: float):
    if abs(batch.theta - expected) > 1e-9:
        raise ValueError(
            f"quadrature phase mismatch: expected theta={expected}, "
            f"got {batch.theta}")


def _bootstrap_vars(values: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = values.size
    idx = rng.integers(0, n, size=(k, n))
    s = values[idx]
    m = s.mean(axis=1)
    return ((s * s).sum(axis=1) - n * m * m) / (n - 1)


def estimate_purity_homodyne(b0: HomodyneBatch, b45: HomodyneBatch,
                             b90: HomodyneBatch, resamples: int = 400,
                             level: float = 0.68, seed=0) -> PurityEstimate:
    """Three-quadrature purity estimate with a bootstrap percentile CI.

    Each batch is resampled independently.  Degenerate bootstrap
    resamples are dropped from the interval; a degenerate point estimate
    propagates as an error.
    """
    for batch, expected in zip((b0, b45, b90), THREE_QUADRATURE_PHASES):
        _check_phase(batch, expected)
    if not 0.0 < level < 1.0:
        raise ValueError(f"confidence level must lie in (0, 1), got {level}")
    v0, v45, v90 = (float(np.var(b.values, ddof=1)) for b in (b0, b45, b90))
    point = purity_from_three_quadratures(v0, v45, v90)
    rng = make_rng(seed)
    mus = []
    left = resamples
    chunk = max(1, _BOOT_CHUNK_ELEMS // max(b0.n, b45.n, b90.n))
    while left > 0:
        k = min(chunk, left)
        left -= k
        w0 = _bootstrap_vars(b0.values, k, rng)
        w45 = _bootstrap_vars(b45.values, k, rng)
        w90 = _bootstrap_vars(b90.values, k, rng)
        bracket = 4.0 * w45 * (w0 + w90 - w45) - (w0 - w90) ** 2
        mus.append(bracket[bracket > 0] ** -0.5)
    mus = np.concatenate(mus)
    if mus.size < max(2, resamples // 2):
        raise DegenerateSampleError(
            f"only {mus.size}/{resamples} bootstrap resamples were physical")
    lo, hi = _percentile_ci(mus, point, level)
    return PurityEstimate(mu_hat=point, ci_low=lo, ci_high=hi, level=level,
                          n=b0.n + b45.n + b90.n,
                          method=EstimationMethod.THREE_QUADRATURE)


@dataclass(frozen=True)
class SweepRow:
    """One sample-size point of an error-scaling sweep."""

    n: int
    mean_rel_err: float
    std_rel_err: float
    n_degenerate: int


def error_scaling_sweep(state: GaussianState, method: EstimationMethod,
                        n_grid, trials: int, seed) -> list:
    """Mean relative error |mu_hat - mu|/mu versus the number of data.

    For the three-quadrature method the budget n is split as n//3
    detections per quadrature, and degenerate trials are counted rather
    than silently dropped.  Both the across-trial mean and the
    across-trial standard deviation of the relative error are reported.
    """
    n_grid = [int(n) for n in n_grid]
    if not n_grid or any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValueError(f"n_grid must be non-empty and ascending, got {n_grid}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    mu_true = purity(state.cov)
    children = iter(np.random.SeedSequence(seed).spawn(len(n_grid) * trials))
    rows = []
    for n in n_grid:
        errs = []
        degenerate = 0
        for _ in range(trials):
            rng = np.random.Generator(np.random.Philox(next(children)))
            try:
                if method == EstimationMethod.Q_JOINT:
                    est = purity_from_moments(moments_from_q(sample_q(state, n, rng)))
                else:
                    m = max(2, n // 3)
                    v = [float(np.var(sample_homodyne(state, th, m, rng).values, ddof=1))
                         for th in THREE_QUADRATURE_PHASES]
                    est = purity_from_three_quadratures(*v)
            except DegenerateSampleError:
                degenerate += 1
                continue
            errs.append(abs(est - mu_true) / mu_true)
        errs = np.asarray(errs)
        rows.append(SweepRow(n=n,
                             mean_rel_err=float(errs.mean()) if errs.size else math.nan,
                             std_rel_err=float(errs.std(ddof=1)) if errs.size > 1 else math.nan,
                             n_degenerate=degenerate))
    return rows
