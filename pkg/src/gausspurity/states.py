"""Single-mode Gaussian states in the covariance-matrix representation.

Conventions: hbar = 1 and x = (a + a^dag)/sqrt(2), p = i(a^dag - a)/sqrt(2),
so the vacuum has quadrature variance 1/2 and every physical covariance
matrix satisfies det(sigma) >= 1/4.

A state is described either phenomenologically, by displacement (x0, p0),
mean thermal photon number nbar, squeezing magnitude r and squeezing angle
phi, or canonically by the first-moment vector and the symmetric 2x2
covariance matrix.  The two parametrizations are connected by

    sigma_xx = (2*nbar + 1)/2 * (cosh(2r) - sinh(2r)*cos(2*phi))
    sigma_pp = (2*nbar + 1)/2 * (cosh(2r) + sinh(2r)*cos(2*phi))
    sigma_xp = (2*nbar + 1)/2 * sinh(2r)*sin(2*phi)

and the purity of the state is mu = 1/(2*sqrt(det sigma)) = 1/(2*nbar + 1),
independent of displacement and squeezing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import CoverageError, PhysicalityError

VACUUM_VAR = 0.5

# Relative slack on det(sigma) >= 1/4, absorbs float noise from round-trips.
PHYSICALITY_RTOL = 1e-10

# Below this squeezing magnitude the angle is undefined; fixed to phi = 0.
_R_EPS = 1e-12


class PhasePoint(NamedTuple):
    x: float
    p: float


@dataclass(frozen=True)
class GaussianParams:
    """Phenomenological parametrization (x0, p0, nbar, r, phi).

    phi is stored normalized to [0, pi) since phi and phi + pi describe the
    same state; when r vanishes the angle is meaningless and is set to 0.
    """

    x0: float = 0.0
    p0: float = 0.0
    nbar: float = 0.0
    r: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if self.nbar < 0:
            raise ValueError(f"nbar must be >= 0, got {self.nbar}")
        if self.r < 0:
            raise ValueError(f"r must be >= 0, got {self.r}")
        phi = self.phi % math.pi
        if self.r < _R_EPS:
            phi = 0.0
        object.__setattr__(self, "phi", float(phi))

    @property
    def mu(self) -> float:
        """Purity 1/(2*nbar + 1) of the state."""
        return 1.0 / (2.0 * self.nbar + 1.0)


@dataclass(frozen=True)
class CovMatrix:
    """Symmetric 2x2 quadrature covariance matrix (sigma_xx, sigma_pp, sigma_xp)."""

    sxx: float
    spp: float
    sxp: float = 0.0

    @property
    def det(self) -> float:
        return self.sxx * self.spp - self.sxp**2

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.sxx, self.sxp], [self.sxp, self.spp]])

    @classmethod
    def from_matrix(cls, m) -> "CovMatrix":
        m = np.asarray(m, dtype=float)
        if m.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
        return cls(sxx=float(m[0, 0]), spp=float(m[1, 1]),
                   sxp=float(0.5 * (m[0, 1] + m[1, 0])))

    def is_physical(self) -> bool:
        return (self.sxx > 0 and self.spp > 0
                and self.det >= 0.25 * (1.0 - PHYSICALITY_RTOL))

    def require_physical(self) -> "CovMatrix":
        if not self.is_physical():
            raise PhysicalityError(
                f"unphysical covariance matrix: sxx={self.sxx}, spp={self.spp}, "
                f"sxp={self.sxp}, det={self.det} < 1/4")
        return self


@dataclass(frozen=True)
class GaussianState:
    """First moments plus covariance matrix: the canonical representation."""

    cov: CovMatrix
    x0: float = 0.0
    p0: float = 0.0

    @property
    def mean(self) -> np.ndarray:
        return np.array([self.x0, self.p0])

    @classmethod
    def from_params(cls, params: GaussianParams) -> "GaussianState":
        return cls(cov=cov_from_params(params), x0=params.x0, p0=params.p0)

    @classmethod
    def vacuum(cls) -> "GaussianState":
        return cls(cov=CovMatrix(VACUUM_VAR, VACUUM_VAR, 0.0))

    @classmethod
    def thermal(cls, nbar: float) -> "GaussianState":
        return cls.from_params(GaussianParams(nbar=nbar))

    def to_dict(self) -> dict:
        return {"x0": self.x0, "p0": self.p0, "sxx": self.cov.sxx,
                "spp": self.cov.spp, "sxp": self.cov.sxp}

    @classmethod
    def from_dict(cls, d: dict) -> "GaussianState":
        return cls(cov=CovMatrix(d["sxx"], d["spp"], d["sxp"]),
                   x0=d.get("x0", 0.0), p0=d.get("p0", 0.0))


def cov_from_params(params: GaussianParams) -> CovMatrix:
    """Covariance matrix of the state (x0, p0, nbar, r, phi)."""
    c = (2.0 * params.nbar + 1.0) / 2.0
    ch, sh = math.cosh(2.0 * params.r), math.sinh(2.0 * params.r)
    c2, s2 = math.cos(2.0 * params.phi), math.sin(2.0 * params.phi)
    return CovMatrix(sxx=c * (ch - sh * c2), spp=c * (ch + sh * c2),
                     sxp=c * sh * s2)


def params_from_cov(state: GaussianState) -> GaussianParams:
    """Invert cov_from_params.

    nbar comes from det(sigma) = (2*nbar+1)^2/4, r from
    Tr(sigma) = (2*nbar+1)*cosh(2r), and phi from the two-argument
    arctangent of (2*sigma_xp, sigma_pp - sigma_xx), which resolves the
    quadrant ambiguity of the tangent.
    """
    cov = state.cov.require_physical()
    mu = 1.0 / (2.0 * math.sqrt(cov.det))
    nbar = max(0.0, (1.0 / mu - 1.0) / 2.0)
    ch2r = (cov.sxx + cov.spp) * mu
    if ch2r < 1.0:
        if ch2r < 1.0 - 1e-12:
            raise PhysicalityError(f"inconsistent covariance: Tr*mu = {ch2r} < 1")
        ch2r = 1.0
    r = 0.5 * math.acosh(ch2r)
    if r < _R_EPS:
        return GaussianParams(x0=state.x0, p0=state.p0, nbar=nbar)
    phi = 0.5 * math.atan2(2.0 * cov.sxp, cov.spp - cov.sxx)
    return GaussianParams(x0=state.x0, p0=state.p0, nbar=nbar, r=r,
                          phi=phi % math.pi)


def purity(cov: CovMatrix) -> float:
    """mu = 1/(2*sqrt(det sigma)), in (0, 1] for physical matrices."""
    cov.require_physical()
    return 1.0 / (2.0 * math.sqrt(cov.det))


def purity_from_nbar(nbar: float) -> float:
    """mu = 1/(2*nbar + 1); the purity depends on nbar alone."""
    if nbar < 0:
        raise ValueError(f"nbar must be >= 0, got {nbar}")
    return 1.0 / (2.0 * nbar + 1.0)


def linear_entropy(mu: float) -> float:
    """Linear entropy (mixedness) 1 - mu, in the infinite-dimensional limit."""
    if not 0.0 < mu <= 1.0:
        raise ValueError(f"purity must lie in (0, 1], got {mu}")
    return 1.0 - mu


def _wigner_array(state: GaussianState, x, p):
    """Wigner density evaluated elementwise on arrays of phase-space points."""
    cov = state.cov
    det = cov.det
    dx = np.asarray(x, dtype=float) - state.x0
    dp = np.asarray(p, dtype=float) - state.p0
    # sigma^{-1} written out for the 2x2 symmetric case
    quad = (cov.spp * dx * dx - 2.0 * cov.sxp * dx * dp + cov.sxx * dp * dp) / det
    return np.exp(-0.5 * quad) / (2.0 * math.pi * math.sqrt(det))


def wigner_eval(state: GaussianState, pt: PhasePoint) -> float:
    """Value of the Gaussian Wigner function W(x, p) at a phase-space point.

    Normalized as a density over dx dp (unit integral, vacuum peak 1/pi);
    in the complex-plane measure d^2(alpha) = dx dp / 2 the same state
    carries twice this value.
    """
    state.cov.require_physical()
    x, p = pt
    return float(_wigner_array(state, x, p))


def gaussian_weighted_integral(state: GaussianState,
                               integrand: Callable[[np.ndarray, np.ndarray], np.ndarray],
                               half_width_sigmas: float = 8.0,
                               rtol: float = 1e-8,
                               atol: float = 1e-10,
                               start_order: int = 40,
                               max_order: int = 1280) -> float:
    """Integral of integrand(x, p) * W(x, p) over phase space.

    Tensor-product Gauss-Legendre quadrature on a box aligned with the
    principal axes of the covariance matrix, extending half_width_sigmas
    standard deviations along each axis.  The order is doubled until two
    successive values agree to rtol (plus atol for integrals near zero).
    """
    state.cov.require_physical()
    # Gaussian mass outside the box, per axis and both tails.
    tail = 2.0 * math.erfc(half_width_sigmas / math.sqrt(2.0))
    if tail > 1e-9:
        raise CoverageError(
            f"box of +/-{half_width_sigmas} standard deviations leaves "
            f"tail mass {tail:.3e} > 1e-9")
    evals, evecs = np.linalg.eigh(state.cov.matrix)
    half = half_width_sigmas * np.sqrt(evals)
    prev = None
    order = start_order
    while order <= max_order:
        t, w = np.polynomial.legendre.leggauss(order)
        u0 = half[0] * t
        u1 = half[1] * t
        U0, U1 = np.meshgrid(u0, u1, indexing="ij")
        X = state.x0 + evecs[0, 0] * U0 + evecs[0, 1] * U1
        P = state.p0 + evecs[1, 0] * U0 + evecs[1, 1] * U1
        vals = integrand(X, P) * _wigner_array(state, X, P)
        total = float(half[0] * half[1] * np.einsum("i,j,ij->", w, w, vals))
        if prev is not None and abs(total - prev) <= rtol * abs(total) + atol:
            return total
        prev = total
        order *= 2
    raise RuntimeError(f"quadrature did not converge below order {max_order}")


def purity_by_phase_space_integral(state: GaussianState,
                                   half_width_sigmas: float = 8.0,
                                   rtol: float = 1e-8) -> float:
    """Numerical purity from the overlap integral of the Wigner function.

    mu = 2*pi * Int W^2 dx dp for the unit-normalized W used here (the
    same quantity as (pi/2) * Int W^2 in the d^2(alpha)-normalized
    convention).  Independent oracle for purity(); agrees with the
    closed form to well below 1e-6 at the default settings.
    """
    w = lambda x, p: _wigner_array(state, x, p)
    return 2.0 * math.pi * gaussian_weighted_integral(
        state, w, half_width_sigmas=half_width_sigmas, rtol=rtol)


def seralian(X, sigma, gamma) -> float:
    """Scalar X sigma^{-1} gamma sigma^{-1} X^T - Tr[gamma sigma^{-1}].

    Its Gaussian-weighted phase-space integral vanishes for any symmetric
    gamma, which is what decouples the diffusion terms from the
    first-moment dynamics in a noisy channel.
    """
    m = sigma.matrix if isinstance(sigma, CovMatrix) else np.asarray(sigma, dtype=float)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if abs(det) < 1e-300:
        raise ValueError("singular covariance matrix")
    inv = np.linalg.inv(m)
    X = np.asarray(X, dtype=float)
    g = np.asarray(gamma, dtype=float)
    return float(X @ inv @ g @ inv @ X - np.trace(g @ inv))
