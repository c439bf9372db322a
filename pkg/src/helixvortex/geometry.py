"""Helical coefficient functions of the reduced planar problem.

Everything here lives in the reduction plane: ``x`` is a point (or an array
of points with trailing dimension 2) and ``h`` is the helix pitch.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class HelixGeometry:
    """Pitch ``h`` and base radius ``r0`` plus the constants derived from them.

    The base point is ``x0 = (r0, 0)``.  ``dt0`` is the Jacobian of the radial
    deformation at ``x0``; it is diagonal there, so its singular values
    ``c0 <= C0`` are read off directly.

    ``A`` is the point-vortex interaction constant ``H(x0, x0) det DT(x0)``.
    With ``tau_squared=False`` the factor ``tau(r0^2)^2`` is dropped, which
    reproduces the commonly quoted closed form but no longer matches the
    leading-order interaction of the velocity kernel when ``r0 > 0``.
    """

    h: float
    r0: float = 0.0
    tau_squared: bool = True
    A: float = field(init=False)
    B: float = field(init=False)
    c0: float = field(init=False)
    C0: float = field(init=False)
    x0: np.ndarray = field(init=False, repr=False)
    dt0: np.ndarray = field(init=False, repr=False)
    dt0_inv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        h, r0 = float(self.h), float(self.r0)
        if not (math.isfinite(h) and h > 0):
            raise ValueError(f"pitch h must be positive, got {self.h!r}")
        if not (math.isfinite(r0) and r0 >= 0):
            raise ValueError(f"base radius r0 must be >= 0, got {self.r0!r}")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "r0", r0)
        x0 = np.array([r0, 0.0])
        dt0 = dt_map(x0, self)
        A, B = _ode_constants(h, r0, self.tau_squared)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "dt0", dt0)
        object.__setattr__(self, "dt0_inv", np.linalg.inv(dt0))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        # dt0 = diag(C0, c0) because x0 lies on the first axis
        object.__setattr__(self, "c0", float(min(dt0[0, 0], dt0[1, 1])))
        object.__setattr__(self, "C0", float(max(dt0[0, 0], dt0[1, 1])))
        for a in (x0, dt0, self.dt0_inv):
            a.setflags(write=False)


def _pitch(geom) -> float:
    return geom.h if isinstance(geom, HelixGeometry) else float(geom)


def _check_nonneg(s):
    s = np.asarray(s, dtype=float)
    if np.any(s < 0) or np.any(np.isnan(s)):
        raise ValueError("argument s must be non-negative")
    return s


def g_coeff(s, geom):
    """``1 / (2 (h sqrt(s + h^2) + h^2))`` for ``s >= 0``."""
    h = _pitch(geom)
    s = _check_nonneg(s)
    out = 1.0 / (2.0 * (h * np.sqrt(s + h * h) + h * h))
    return float(out) if out.ndim == 0 else out


def tau(s, geom):
    """Exponential of the integral of :func:`g_coeff` from 0 to ``s``.

    Closed form: with ``U = sqrt(s + h^2)`` the integral equals
    ``(U - h)/h - ln((U + h)/(2h))``.
    """
    h = _pitch(geom)
    s = _check_nonneg(s)
    u = np.sqrt(s + h * h)
    out = np.exp((u - h) / h) * (2.0 * h) / (u + h)
    return float(out) if out.ndim == 0 else out


def t_map(x, geom):
    """The radial deformation ``T(x) = tau(|x|^2) x``."""
    x = np.asarray(x, dtype=float)
    s = np.sum(x * x, axis=-1)
    return np.asarray(tau(s, geom))[..., None] * x


def dt_map(x, geom):
    """Jacobian of :func:`t_map`; returns an array of shape ``(..., 2, 2)``."""
    h = _pitch(geom)
    x = np.asarray(x, dtype=float)
    s = np.sum(x * x, axis=-1)
    t = np.asarray(tau(s, geom))
    c = 1.0 / (h * h + h * np.sqrt(h * h + s))
    outer = x[..., :, None] * x[..., None, :]
    return t[..., None, None] * (np.eye(2) + c[..., None, None] * outer)


def k_matrix(x, geom):
    """Coefficient matrix of the elliptic operator ``div(K grad)``."""
    h = _pitch(geom)
    x = np.asarray(x, dtype=float)
    x1, x2 = x[..., 0], x[..., 1]
    den = x1 * x1 + x2 * x2 + h * h
    out = np.empty(x.shape[:-1] + (2, 2))
    out[..., 0, 0] = (h * h + x2 * x2) / den
    out[..., 0, 1] = -x1 * x2 / den
    out[..., 1, 0] = out[..., 0, 1]
    out[..., 1, 1] = (h * h + x1 * x1) / den
    return out


def _big_x(x, h):
    x = np.asarray(x, dtype=float)
    return np.sqrt(np.sum(x * x, axis=-1) + h * h)


def h_weight(x, y, geom):
    """``(det K(x) det K(y))^(-1/4) / 2pi``, written as ``sqrt(|X||Y|)/(2 pi h)``."""
    h = _pitch(geom)
    out = np.sqrt(_big_x(x, h) * _big_x(y, h)) / (TWO_PI * h)
    return float(out) if np.ndim(out) == 0 else out


def h_weight_grad(x, y, geom):
    """Gradient of :func:`h_weight` with respect to ``x``."""
    h = _pitch(geom)
    x = np.asarray(x, dtype=float)
    bx = _big_x(x, h)
    by = _big_x(y, h)
    coef = np.sqrt(by) / (2.0 * bx ** 1.5 * TWO_PI * h)
    return np.asarray(coef)[..., None] * x


def ode_constants(geom: HelixGeometry):
    """Interaction constant ``A`` and drift constant ``B`` of the point-vortex system."""
    return _ode_constants(geom.h, geom.r0, geom.tau_squared)


def _ode_constants(h, r0, tau_squared=True):
    if not h > 0:
        raise ValueError(f"pitch h must be positive, got {h!r}")
    big = math.sqrt(h * h + r0 * r0)
    t0 = tau(r0 * r0, h)
    A = big * (r0 * r0 + h * h + h * big) / (TWO_PI * h * (h * h + h * big))
    if tau_squared:
        A *= t0 * t0
    B = t0 * r0 / (2.0 * TWO_PI * h * big)
    return A, B


def perp(v):
    """Counter-clockwise rotation by a right angle: ``(a, b) -> (-b, a)``."""
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)
