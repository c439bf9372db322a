"""Two-vortex reduction: relative Hamiltonian, level sets, orbit periods.

With ``x = P~_1 - P~_2`` and ``y = (a1 P~_1 + a2 P~_2)/(a1 + a2)`` the relative
motion is ``x' = perp grad Hrel(x)`` where

    Hrel(x) = (a1 + a2) A1 / (4 pi) ln|x|^2 - (a1 - a2) B1 / (4 pi) x_1,

``A1 = 2 pi A`` and ``B1 = 4 pi B``.  Level sets are ``|x|^2 = C_E exp(x_1/a')``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.special import roots_legendre

from .errors import (DegenerateStrengthError, NoCriticalLevelError, NoPeriodError,
                     NoReturnError)
from .geometry import HelixGeometry
from .integrators import rk4_step
from .pointvortex import OdeState

FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class LeapfrogParams:
    geom: HelixGeometry
    a1: float
    a2: float

    def __post_init__(self):
        a1, a2 = float(self.a1), float(self.a2)
        if a1 + a2 == 0:
            raise DegenerateStrengthError("a1 + a2 must be nonzero")
        if a1 == 0 or a2 == 0:
            raise ValueError("strengths must be nonzero")
        object.__setattr__(self, "a1", a1)
        object.__setattr__(self, "a2", a2)

    @property
    def A1(self) -> float:
        return 2.0 * math.pi * self.geom.A

    @property
    def B1(self) -> float:
        return FOUR_PI * self.geom.B

    @property
    def total(self) -> float:
        return self.a1 + self.a2

    @property
    def has_drift(self) -> bool:
        """False when the relative Hamiltonian is a pure logarithm (r0 = 0 or a1 = a2)."""
        return self.B1 != 0 and self.a1 != self.a2

    @property
    def a_prime(self) -> Optional[float]:
        if not self.has_drift:
            return None
        return self.total * self.A1 / ((self.a1 - self.a2) * self.B1)

    @property
    def x_star(self) -> Optional[np.ndarray]:
        ap = self.a_prime
        return None if ap is None else np.array([2.0 * ap, 0.0])

    @property
    def c_star(self) -> Optional[float]:
        ap = self.a_prime
        return None if ap is None else (2.0 * ap / math.e) ** 2

    @property
    def rotation_scale(self) -> float:
        """``4 pi / ((a1 + a2) A1)``; the period prefactor."""
        return FOUR_PI / (self.total * self.A1)


def reduce(state: OdeState, params: LeapfrogParams):
    """Relative vector and strength-weighted centre of a two-vortex state."""
    p = state.p_tilde
    if p.shape != (2, 2):
        raise ValueError("reduce() needs exactly two vortices")
    x = p[0] - p[1]
    y = (params.a1 * p[0] + params.a2 * p[1]) / params.total
    return x, y


def reconstruct(x, y, params: LeapfrogParams, t: float = 0.0) -> OdeState:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = params.total
    return OdeState(t, np.stack([y + params.a2 * x / s, y - params.a1 * x / s]))


def relative_hamiltonian(x, params: LeapfrogParams):
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1)
    if np.any(r2 == 0):
        raise ValueError("relative Hamiltonian is singular at x = 0")
    out = (params.total * params.A1 * np.log(r2)
           - (params.a1 - params.a2) * params.B1 * x[..., 0]) / FOUR_PI
    return float(out) if np.ndim(out) == 0 else out


def relative_velocity(x, params: LeapfrogParams):
    """``perp grad Hrel(x)``, the relative velocity of the reduced system."""
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1)
    c = params.total * params.A1 / (2.0 * math.pi)
    v = np.empty_like(x)
    v[..., 0] = -c * x[..., 1] / r2
    v[..., 1] = c * x[..., 0] / r2 - (params.a1 - params.a2) * params.B1 / FOUR_PI
    return v


def centroid_velocity(params: LeapfrogParams) -> np.ndarray:
    a1, a2 = params.a1, params.a2
    return np.array([0.0, -(a1 * a1 + a2 * a2) * params.geom.B / params.total])


# ---------------------------------------------------------------------------
# levels

def level_constant(E: float, params: LeapfrogParams) -> float:
    """``C_E = exp(4 pi E / ((a1 + a2) A1))``."""
    return math.exp(E * params.rotation_scale)


def level_energy(c_e: float, params: LeapfrogParams) -> float:
    """Inverse of :func:`level_constant`."""
    if not c_e > 0:
        raise ValueError("level constant must be positive")
    return math.log(c_e) / params.rotation_scale


def critical_level(params: LeapfrogParams) -> float:
    c = params.c_star
    if c is None:
        raise NoCriticalLevelError(
            "no equilibrium when r0 = 0 or a1 = a2; every level is periodic")
    return c


def level_constants(E: float, params: LeapfrogParams):
    """``(C_E, C*)``; raises :class:`NoCriticalLevelError` when ``C*`` does not exist."""
    return level_constant(E, params), critical_level(params)


def level_of_point(x, params: LeapfrogParams) -> float:
    """The level constant ``C_E`` of the level set through ``x``."""
    x = np.asarray(x, dtype=float)
    r2 = float(x @ x)
    ap = params.a_prime
    return r2 if ap is None else r2 * math.exp(-x[0] / ap)


def level_residual(x1, c_e: float, params: LeapfrogParams):
    """``C_E exp(x1/a') - x1^2``; the level curve is ``x2 = +-sqrt`` of this."""
    x1 = np.asarray(x1, dtype=float)
    ap = params.a_prime
    growth = 1.0 if ap is None else np.exp(x1 / ap)
    return c_e * growth - x1 * x1


def level_curve(x1, c_e: float, params: LeapfrogParams):
    """Upper branch ``f(x1)``; NaN outside the domain."""
    r = level_residual(x1, c_e, params)
    with np.errstate(invalid="ignore"):
        return np.where(r >= 0, np.sqrt(np.maximum(r, 0.0)), np.nan)


@dataclass(frozen=True)
class DomainRoots:
    """Root classification of ``C_E exp(x1/a') = x1^2``.

    ``kind`` is ``"periodic"`` (closed orbit on ``[eta1, eta2]``; ``eta3`` is
    the start of the unbounded branch, absent for a pure-log Hamiltonian) or
    ``"unbounded"`` (single root ``eta_bar``).  At the critical level the
    double root is reported as ``tangent``.
    """

    kind: str
    eta1: Optional[float] = None
    eta2: Optional[float] = None
    eta3: Optional[float] = None
    eta_bar: Optional[float] = None
    tangent: Optional[float] = None

    @property
    def roots(self):
        if self.kind == "periodic":
            return [r for r in (self.eta1, self.eta2, self.eta3) if r is not None]
        return [r for r in (self.eta_bar, self.tangent) if r is not None]


def _bisect(f, lo, hi):
    flo = f(lo)
    fhi = f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ValueError(f"root not bracketed on [{lo}, {hi}]")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    # return whichever endpoint has the smaller residual
    return lo if abs(flo) <= abs(f(hi)) else hi


CRITICAL_RTOL = 1e-12


def domain_roots(c_e: float, params: LeapfrogParams) -> DomainRoots:
    if not c_e > 0:
        raise ValueError("level constant must be positive")
    ap = params.a_prime
    sq = math.sqrt(c_e)
    if ap is None:
        return DomainRoots("periodic", -sq, sq, None)
    # work with a positive growth scale and mirror back
    s = 1.0 if ap > 0 else -1.0
    b = abs(ap)

    def phi(u):
        return c_e * math.exp(u / b) - u * u

    eta_neg = _bisect(phi, -2.0 * sq, 0.0)
    c_star = (2.0 * b / math.e) ** 2
    ratio = c_e / c_star
    if ratio >= 1.0 or abs(ratio - 1.0) <= CRITICAL_RTOL:
        tangent = None
        if abs(ratio - 1.0) <= 1e-9:
            # |x|^2 e^{-x/b} has its maximum slope-zero point at 2b
            tangent = _bisect(lambda u: 1.0 / b - 2.0 / u, b, 4.0 * b)
        if s < 0:
            return DomainRoots("unbounded", eta_bar=-eta_neg,
                               tangent=None if tangent is None else -tangent)
        return DomainRoots("unbounded", eta_bar=eta_neg, tangent=tangent)
    eta_mid = _bisect(phi, 0.0, 2.0 * b)
    hi = 4.0 * b
    while phi(hi) <= 0:
        hi *= 2.0
    eta_far = _bisect(phi, 2.0 * b, hi)
    if s < 0:
        return DomainRoots("periodic", -eta_mid, -eta_neg, -eta_far)
    return DomainRoots("periodic", eta_neg, eta_mid, eta_far)


def on_closed_orbit(x, params: LeapfrogParams) -> bool:
    """True when the level curve through ``x`` is the closed orbit (not the open branch)."""
    x = np.asarray(x, dtype=float)
    roots = domain_roots(level_of_point(x, params), params)
    if roots.kind != "periodic":
        return False
    slack = 1e-12 * max(1.0, abs(roots.eta1), abs(roots.eta2))
    return roots.eta1 - slack <= x[0] <= roots.eta2 + slack


# ---------------------------------------------------------------------------
# periods

def small_level_period(c_e: float, params: LeapfrogParams) -> float:
    """Small-level asymptotic period ``4 pi^2 C_E / ((a1 + a2) A1)``."""
    return abs(math.pi * c_e * params.rotation_scale)


@lru_cache(maxsize=16)
def _legendre(n):
    return roots_legendre(n)


def _taylor_ratio(c_e, eta, ap, d, sign):
    """``res(eta + sign*d) / d`` from a fourth-order expansion about the root ``eta``."""
    e = c_e * math.exp(eta / ap)
    d1 = e / ap - 2.0 * eta
    d2 = e / ap ** 2 - 2.0
    d3 = e / ap ** 3
    d4 = e / ap ** 4
    u = sign * d
    return sign * (d1 + u * (d2 / 2.0 + u * (d3 / 6.0 + u * d4 / 24.0)))


def _gauss_period(c_e, eta1, eta2, ap, n):
    nodes, wts = _legendre(n)
    theta = 0.5 * math.pi * (nodes + 1.0)
    mid = 0.5 * (eta1 + eta2)
    half = 0.5 * (eta2 - eta1)
    x = mid - half * np.cos(theta)
    growth = np.exp(x / ap)
    # res = (x - eta1)(eta2 - x) q(x) with (x - eta1)(eta2 - x) = half^2 sin^2(theta),
    # so dx / sqrt(res) = dtheta / sqrt(q).  Both distances are exact in theta.
    da = 2.0 * half * np.sin(0.5 * theta) ** 2
    db = 2.0 * half * np.cos(0.5 * theta) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        q = (c_e * growth - x * x) / (da * db)
    near_a = da < 1e-3 * half
    near_b = db < 1e-3 * half
    q[near_a] = _taylor_ratio(c_e, eta1, ap, da[near_a], 1.0) / db[near_a]
    q[near_b] = _taylor_ratio(c_e, eta2, ap, db[near_b], -1.0) / da[near_b]
    return 0.5 * math.pi * float(np.dot(wts, growth / np.sqrt(q)))


def period_quadrature(c_e: float, params: LeapfrogParams, rtol: float = 1e-10,
                      n_start: int = 32, n_max: int = 4096) -> float:
    """Period of the closed orbit on level ``C_E``.

    The integrand has inverse-square-root singularities at both roots; the
    substitution ``x1 = mid - half cos(theta)`` removes them and Gauss-Legendre
    in ``theta`` is refined until two successive rules agree to ``rtol``.
    """
    if not params.has_drift:
        if not c_e > 0:
            raise ValueError("level constant must be positive")
        return small_level_period(c_e, params)
    roots = domain_roots(c_e, params)
    if roots.kind != "periodic":
        raise NoPeriodError(f"level C_E={c_e!r} is not below the critical level")
    ap = params.a_prime
    n = n_start
    prev = _gauss_period(c_e, roots.eta1, roots.eta2, ap, n)
    while True:
        n *= 2
        cur = _gauss_period(c_e, roots.eta1, roots.eta2, ap, n)
        if abs(cur - prev) <= rtol * abs(cur) or n >= n_max:
            break
        prev = cur
    return abs(c_e * params.rotation_scale * cur)


def integrate_relative(x_init, params: LeapfrogParams, dt: float, n_steps: int) -> np.ndarray:
    """RK4 path of the relative system; returns ``n_steps + 1`` points."""
    x = np.asarray(x_init, dtype=float)
    out = np.empty((n_steps + 1, 2))
    out[0] = x
    f = lambda z: relative_velocity(z, params)
    for k in range(1, n_steps + 1):
        x = rk4_step(f, x, dt)
        out[k] = x
    return out


def orbit_period(x_init, params: LeapfrogParams, dt: float, horizon: Optional[float] = None) -> float:
    """Measure the orbit period by first return to a section through ``x_init``.

    The section is the line through ``x_init`` normal to the initial velocity
    (for a start on the ``x1`` axis this is ``{x2 = 0}`` crossed in the
    initial direction).  The crossing is located by linear interpolation in
    time and then polished with a secant iteration on partial RK4 steps.
    """
    x0 = np.asarray(x_init, dtype=float)
    v0 = relative_velocity(x0, params)
    n = v0 / np.hypot(*v0)
    if horizon is None:
        horizon = 20.0 * small_level_period(level_of_point(x0, params), params) + 1000 * dt
    f = lambda z: relative_velocity(z, params)
    sec = lambda z: float((z - x0) @ n)
    x = x0
    s_prev = 0.0
    t = 0.0
    # leave the neighbourhood of the start before looking for a return
    left = False
    max_steps = int(math.ceil(horizon / dt))
    for _ in range(max_steps):
        x_new = rk4_step(f, x, dt)
        s_new = sec(x_new)
        if not left:
            left = s_new < 0
        elif s_prev < 0 <= s_new:
            frac = -s_prev / (s_new - s_prev)
            return t + _refine_crossing(f, sec, x, dt, frac)
        x, s_prev, t = x_new, s_new, t + dt
    raise NoReturnError(f"no return to the section within t={horizon!r}")


def _refine_crossing(f, sec, x, dt, frac):
    def g(theta):
        return sec(rk4_step(f, x, theta * dt))

    a, b = 0.0, 1.0
    ga, gb = g(a), g(b)
    c = frac
    for _ in range(50):
        gc = g(c)
        if gc == 0:
            break
        if (gc < 0) == (ga < 0):
            a, ga = c, gc
        else:
            b, gb = c, gc
        c_new = a - ga * (b - a) / (gb - ga)
        if abs(c_new - c) < 1e-15:
            c = c_new
            break
        c = c_new
    return c * dt


# ---------------------------------------------------------------------------
# separation certificate

@dataclass(frozen=True)
class Certificate:
    passed: bool
    minimum: float
    threshold: float


def min_separation_certificate(x_path, params: LeapfrogParams, rho: float) -> Certificate:
    """Check ``min_t |DT(x0)^{-1} x(t)| >= 4 rho`` over trajectory samples."""
    x_path = np.asarray(x_path, dtype=float).reshape(-1, 2)
    if x_path.size == 0:
        raise ValueError("empty trajectory")
    p = x_path @ params.geom.dt0_inv.T
    m = float(np.min(np.hypot(p[:, 0], p[:, 1])))
    return Certificate(m >= 4.0 * rho, m, 4.0 * rho)


def max_admissible_rho(separation: float, geom: HelixGeometry) -> float:
    """Largest ``rho`` with ``4 rho < |P1 - P2| (h^2 + h|X0|)/(r0^2 + h^2 + h|X0|)``."""
    h, r0 = geom.h, geom.r0
    big = math.sqrt(h * h + r0 * r0)
    return separation * (h * h + h * big) / (r0 * r0 + h * h + h * big) / 4.0
