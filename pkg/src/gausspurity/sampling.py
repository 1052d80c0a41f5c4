"""Seeded synthetic measurement records for Gaussian states.

Two kinds of records are generated:

* joint (heterodyne-style) samples of conjugate quadrature pairs,
  distributed according to the Husimi Q-function of the state, which for
  a Gaussian state is a Gaussian with covariance sigma + I/2 -- the extra
  vacuum unit is forced by antinormal ordering, so that
  E_Q[x^2] - 1/2 = <x^2>;
* single-quadrature (balanced homodyne) samples of the rotated quadrature
  x_theta, Gaussian with variance u^T sigma u, u = (cos theta, sin theta).

All generators are backed by the counter-based Philox bit generator, so a
given (state, n, seed) triple produces a bit-identical record regardless
of what else has been sampled, and parallel batch generation with derived
seeds is schedule-independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .states import GaussianState

CSV_Q_HEADER = "x,p"
CSV_HOMODYNE_HEADER = "theta,value"


def make_rng(seed) -> np.random.Generator:
    """Generator from a 64-bit seed; passes an existing Generator through."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class QSampleBatch:
    """Joint-quadrature record: an (n, 2) array of (x, p) pairs."""

    pairs: np.ndarray

    def __post_init__(self):
        pairs = np.atleast_2d(np.asarray(self.pairs, dtype=float))
        if pairs.ndim != 2 or pairs.shape[1] != 2 or pairs.shape[0] < 1:
            raise ValueError(f"pairs must have shape (n >= 1, 2), got {pairs.shape}")
        object.__setattr__(self, "pairs", pairs)

    @property
    def n(self) -> int:
        return self.pairs.shape[0]

    @property
    def x(self) -> np.ndarray:
        return self.pairs[:, 0]

    @property
    def p(self) -> np.ndarray:
        return self.pairs[:, 1]

    def to_csv(self, path):
        np.savetxt(path, self.pairs, delimiter=",", header=CSV_Q_HEADER,
                   comments="", fmt="%.17g")

    @classmethod
    def from_csv(cls, path) -> "QSampleBatch":
        return cls(pairs=np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2))


@dataclass(frozen=True)
class HomodyneBatch:
    """Single-quadrature record at fixed phase theta."""

    theta: float
    values: np.ndarray

    def __post_init__(self):
        values = np.atleast_1d(np.asarray(self.values, dtype=float))
        if values.ndim != 1 or values.size < 2:
            raise ValueError(
                f"need at least 2 homodyne values (variance must be estimable), "
                f"got {values.size}")
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.size

    def to_csv(self, path):
        rows = np.column_stack([np.full(self.n, self.theta), self.values])
        np.savetxt(path, rows, delimiter=",", header=CSV_HOMODYNE_HEADER,
                   comments="", fmt="%.17g")

    @classmethod
    def from_csv(cls, path) -> "HomodyneBatch":
        rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        thetas = np.unique(rows[:, 0])
        if thetas.size != 1:
            raise ValueError(
                f"{path}: expected a single quadrature phase, found {thetas.size}; "
                "use read_homodyne_batches for mixed-phase files")
        return cls(theta=float(thetas[0]), values=rows[:, 1])


def read_homodyne_batches(path) -> dict:
    """Read a mixed-phase homodyne CSV, grouped by theta."""
    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {float(t): HomodyneBatch(theta=float(t), values=rows[rows[:, 0] == t, 1])
            for t in np.unique(rows[:, 0])}


def write_homodyne_batches(batches, path):
    """Write several homodyne batches into one mixed-phase CSV."""
    rows = np.vstack([np.column_stack([np.full(b.n, b.theta), b.values])
                      for b in batches])
    np.savetxt(path, rows, delimiter=",", header=CSV_HOMODYNE_HEADER,
               comments="", fmt="%.17g")


def q_covariance(state: GaussianState) -> np.ndarray:
    """Covariance sigma + I/2 of the Husimi Q-function of the state."""
    return state.cov.matrix + 0.5 * np.eye(2)


def sample_q(state: GaussianState, n: int, seed) -> QSampleBatch:
    """Draw n joint-quadrature pairs from the Q-function of the state."""
    state.cov.require_physical()
    if n < 1:
        raise ValueError(f"need n >= 1 Q-samples, got {n}")
    rng = make_rng(seed)
    chol = np.linalg.cholesky(q_covariance(state))
    z = rng.standard_normal((n, 2))
    return QSampleBatch(pairs=state.mean + z @ chol.T)


def homodyne_variance(state: GaussianState, theta: float) -> float:
    """Variance u^T sigma u of the rotated quadrature x_theta.

    Equals (1/2mu)*(exp(-2r)*cos^2(theta + phi) + exp(2r)*sin^2(theta + phi))
    in the phenomenological parametrization: with the sigma_ij sign
    convention used throughout, the squeezed principal axis of a state
    with angle phi sits at quadrature phase -phi.
    """
    c, s = math.cos(theta), math.sin(theta)
    cov = state.cov
    return cov.sxx * c * c + 2.0 * cov.sxp * c * s + cov.spp * s * s


def homodyne_mean(state: GaussianState, theta: float) -> float:
    """Center x0*cos(theta) + p0*sin(theta) of the x_theta distribution."""
    return state.x0 * math.cos(theta) + state.p0 * math.sin(theta)


def sample_homodyne(state: GaussianState, theta: float, n: int, seed) -> HomodyneBatch:
    """Draw n balanced-homodyne outcomes of the quadrature x_theta."""
    state.cov.require_physical()
    if n < 2:
        raise ValueError(f"need n >= 2 homodyne samples, got {n}")
    rng = make_rng(seed)
    sd = math.sqrt(homodyne_variance(state, theta))
    values = homodyne_mean(state, theta) + sd * rng.standard_normal(n)
    return HomodyneBatch(theta=theta, values=values)
