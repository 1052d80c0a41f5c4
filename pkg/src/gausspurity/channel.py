"""Gaussian-state evolution in thermal and squeezed-thermal noisy channels.

A Markovian bath is described by the damping rate gamma (inverse photon
lifetime), a thermal parameter N and a complex squeezing M = M1 + i*M2
with |M|^2 <= N(N+1).  At the covariance level the dynamics is the linear
matrix equation

    d(sigma)/dt = gamma * (sigma_inf - sigma),     dX0/dt = -gamma/2 * X0,

whose solution is the convex combination
sigma(t) = sigma_inf*(1 - e^{-gamma t}) + sigma(0)*e^{-gamma t}.  All
closed forms for purity, squeezing magnitude and squeezing angle along
the trajectory follow from that combination; a fixed-step Runge-Kutta
integrator of the same ODE is provided as an independent oracle.

The squeezing angle is recovered with a two-argument arctangent so it
always matches the angle of sigma(t) itself; the tangent-only asymptotic
formula tan(2*phi_inf) = -M2/M1 is quadrant-blind, which matters for the
optimal-input construction (see optimal_input).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PhysicalityError, UnphysicalBathError, UnsupportedConditionError
from .states import CovMatrix, GaussianParams, GaussianState, cov_from_params

_R_EPS = 1e-12


@dataclass(frozen=True)
class BathParams:
    """Noisy-channel description (gamma, N, M1, M2)."""

    gamma: float = 1.0
    N: float = 0.0
    M1: float = 0.0
    M2: float = 0.0

    @property
    def m_abs2(self) -> float:
        return self.M1**2 + self.M2**2


@dataclass(frozen=True)
class ChannelAsymptote:
    """Asymptotic purity, squeezing and thermal photon number of a channel."""

    mu_inf: float
    r_inf: float
    phi_inf: float
    nbar_inf: float


def validate_bath(bath: BathParams) -> BathParams:
    """Check gamma > 0, N >= 0 and the positivity bound |M|^2 <= N(N+1)."""
    if bath.gamma <= 0:
        raise UnphysicalBathError(f"damping rate must satisfy gamma > 0, got {bath.gamma}")
    if bath.N < 0:
        raise UnphysicalBathError(f"thermal parameter must satisfy N >= 0, got {bath.N}")
    bound = bath.N * (bath.N + 1.0)
    if bath.m_abs2 > bound * (1.0 + 1e-12) + 1e-300:
        raise UnphysicalBathError(
            f"bath squeezing violates |M|^2 <= N(N+1): "
            f"|M|^2 = {bath.m_abs2} > {bound}")
    return bath


def asymptotic_cov(bath: BathParams) -> CovMatrix:
    """Asymptotic covariance matrix sigma_inf of the channel."""
    validate_bath(bath)
    half = (2.0 * bath.N + 1.0) / 2.0
    return CovMatrix(sxx=half + bath.M1, spp=half - bath.M1, sxp=bath.M2)


def channel_asymptote(bath: BathParams) -> ChannelAsymptote:
    """Asymptotic (mu, r, phi, nbar) reached by every input state."""
    validate_bath(bath)
    mu_inf = ((2.0 * bath.N + 1.0) ** 2 - 4.0 * bath.m_abs2) ** -0.5
    ch = math.sqrt(1.0 + 4.0 * mu_inf**2 * bath.m_abs2)
    r_inf = 0.5 * math.acosh(max(ch, 1.0))
    if r_inf < _R_EPS:
        phi_inf = 0.0
    else:
        phi_inf = (0.5 * math.atan2(2.0 * bath.M2, -2.0 * bath.M1)) % math.pi
    return ChannelAsymptote(mu_inf=mu_inf, r_inf=r_inf, phi_inf=phi_inf,
                            nbar_inf=(1.0 / mu_inf - 1.0) / 2.0)


def evolve_cov(state: GaussianState, bath: BathParams, t: float) -> GaussianState:
    """Exact state at time t: convex combination of sigma(0) and sigma_inf.

    First moments are damped as e^{-gamma t/2} (the channel absorbs the
    coherent photons of the state).
    """
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    state.cov.require_physical()
    sinf = asymptotic_cov(bath)
    eta = math.exp(-bath.gamma * t)
    om = 1.0 - eta
    cov = CovMatrix(sxx=sinf.sxx * om + state.cov.sxx * eta,
                    spp=sinf.spp * om + state.cov.spp * eta,
                    sxp=sinf.sxp * om + state.cov.sxp * eta)
    damp = math.exp(-bath.gamma * t / 2.0)
    return GaussianState(cov=cov, x0=state.x0 * damp, p0=state.p0 * damp)


def mu_of_t(state0: GaussianParams, bath: BathParams, t: float) -> float:
    """Purity at time t of the evolved state, in closed form.

    Agrees with purity(evolve_cov(...)) to better than 1e-10; the closed
    form is the expansion of det(sigma(t)) for the convex combination.
    """
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    asym = channel_asymptote(bath)
    mu0 = state0.mu
    eta = math.exp(-bath.gamma * t)
    om = 1.0 - eta
    cross = ((2.0 * bath.N + 1.0) * math.cosh(2.0 * state0.r)
             + 2.0 * math.sinh(2.0 * state0.r)
             * (bath.M1 * math.cos(2.0 * state0.phi)
                - bath.M2 * math.sin(2.0 * state0.phi)))
    bracket = (mu0**2 / asym.mu_inf**2) * om**2 + eta**2 + 2.0 * mu0 * cross * om * eta
    return mu0 / math.sqrt(bracket)


def r_of_t(state0: GaussianParams, bath: BathParams, t: float) -> float:
    """Squeezing magnitude at time t, from the cosh(2r(t)) closed form."""
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    validate_bath(bath)
    eta = math.exp(-bath.gamma * t)
    mu_t = mu_of_t(state0, bath, t)
    arg = mu_t * ((2.0 * bath.N + 1.0) * (1.0 - eta)
                  + eta * math.cosh(2.0 * state0.r) / state0.mu)
    if arg < 1.0:
        if arg < 1.0 - 1e-12:
            raise PhysicalityError(f"cosh(2r(t)) = {arg} < 1")
        arg = 1.0
    return 0.5 * math.acosh(arg)


def phi_of_t(state0: GaussianParams, bath: BathParams, t: float) -> float:
    """Squeezing angle at time t, normalized to [0, pi).

    Numerator and denominator of the tan(2*phi(t)) closed form are fed to
    atan2 separately, which keeps the angle consistent with the actual
    covariance matrix at all times.  In a thermal bath (M = 0) the angle
    is constant; when the squeezing vanishes the angle is set to 0.
    """
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    validate_bath(bath)
    eta = math.exp(-bath.gamma * t)
    om = 1.0 - eta
    mu0 = state0.mu
    sh = math.sinh(2.0 * state0.r)
    num = 2.0 * mu0 * bath.M2 * om + sh * math.sin(2.0 * state0.phi) * eta
    den = -2.0 * mu0 * bath.M1 * om + sh * math.cos(2.0 * state0.phi) * eta
    if math.hypot(num, den) < 1e-300:
        return 0.0
    return (0.5 * math.atan2(num, den)) % math.pi


def mu_optimal(mu0: float, bath: BathParams, t: float) -> float:
    """Purity evolution of a non-squeezed input: the optimum at every time."""
    if not 0.0 < mu0 <= 1.0:
        raise ValueError(f"initial purity must lie in (0, 1], got {mu0}")
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    mu_inf = channel_asymptote(bath).mu_inf
    eta = math.exp(-bath.gamma * t)
    return mu0 * mu_inf / (mu0 + eta * (mu_inf - mu0))


def has_purity_minimum(state0: GaussianParams, bath: BathParams) -> bool:
    """Whether mu(t) dips through an interior minimum in a thermal bath.

    The criterion cosh(2*r0) > max(mu0/mu_inf, mu_inf/mu0) holds only for
    M = 0; squeezed baths are rejected (locate the minimum numerically on
    mu_of_t instead).
    """
    if bath.M1 != 0.0 or bath.M2 != 0.0:
        raise UnsupportedConditionError(
            "the purity-minimum criterion is defined for thermal (M = 0) baths only")
    validate_bath(bath)
    mu0 = state0.mu
    mu_inf = 1.0 / (2.0 * bath.N + 1.0)
    return math.cosh(2.0 * state0.r) > max(mu0 / mu_inf, mu_inf / mu0)


def optimal_input(bath: BathParams) -> GaussianParams:
    """Pure input state whose purity evolution is optimal at every time.

    The input squeezing magnitude equals the asymptotic one, and its angle
    equals the angle of sigma_inf, so the input and bath contributions to
    the determinant of the convex combination cancel exactly and mu(t)
    reduces to mu_optimal(1, bath, t).  In a thermal bath this is a
    coherent state.

    Note: relative to the quadrant-blind branch of tan(2*phi_inf) = -M2/M1
    this angle is the "orthogonal" choice phi + pi/2; expressed through
    the angle of the asymptotic covariance matrix (which is what
    channel_asymptote returns) it coincides with phi_inf itself.
    """
    asym = channel_asymptote(bath)
    return GaussianParams(nbar=0.0, r=asym.r_inf, phi=asym.phi_inf)


def integrate_cov_ode(state: GaussianState, bath: BathParams, t: float,
                      step: float) -> GaussianState:
    """Fixed-step classical RK4 integration of the covariance/mean ODE.

    Purely an independent oracle for evolve_cov; the ODE is linear, so no
    adaptive stepping is warranted.  Matches the closed form to O(step^4).
    """
    if step <= 0:
        raise ValueError(f"step must be > 0, got {step}")
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    state.cov.require_physical()
    sinf = asymptotic_cov(bath)
    g = bath.gamma
    target = np.array([sinf.sxx, sinf.spp, sinf.sxp, 0.0, 0.0])
    rate = np.array([g, g, g, 0.5 * g, 0.5 * g])
    y = np.array([state.cov.sxx, state.cov.spp, state.cov.sxp, state.x0, state.p0])

    def f(y):
        return rate * (target - y)

    n_steps = max(1, int(math.ceil(t / step - 1e-12)))
    h = t / n_steps
    for _ in range(n_steps):
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return GaussianState(cov=CovMatrix(sxx=y[0], spp=y[1], sxp=y[2]),
                         x0=y[3], p0=y[4])


@dataclass(frozen=True)
class Trajectory:
    """Sampled evolution: times in units of 1/gamma plus per-time summaries."""

    times: np.ndarray        # gamma * t
    states: list
    mus: np.ndarray
    rs: np.ndarray
    phis: np.ndarray

    def to_csv(self, path):
        import csv

        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["gamma_t", "mu", "r", "phi",
                             "sxx", "spp", "sxp", "x0", "p0"])
            for gt, mu, r, phi, s in zip(self.times, self.mus, self.rs,
                                         self.phis, self.states):
                writer.writerow([gt, mu, r, phi, s.cov.sxx, s.cov.spp,
                                 s.cov.sxp, s.x0, s.p0])


def trajectory(state0: GaussianParams, bath: BathParams, times) -> Trajectory:
    """Evaluate the analytic evolution on a time grid (physical times)."""
    validate_bath(bath)
    times = np.asarray(times, dtype=float)
    initial = GaussianState(cov=cov_from_params(state0), x0=state0.x0, p0=state0.p0)
    states = [evolve_cov(initial, bath, t) for t in times]
    mus = np.array([mu_of_t(state0, bath, t) for t in times])
    rs = np.array([r_of_t(state0, bath, t) for t in times])
    phis = np.array([phi_of_t(state0, bath, t) for t in times])
    return Trajectory(times=bath.gamma * times, states=states, mus=mus,
                      rs=rs, phis=phis)
