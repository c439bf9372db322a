"""Regularised singular part of the Green's function and its velocity kernel.

For sources ``y`` and targets ``x`` the scalar kernel is

    G(x, y) = H(x, y) * 0.5 * ln(|T(x) - T(y)|^2 + delta^2)

and the velocity kernel is its exact perpendicular gradient in ``x``.  The
regular remainder of the Green's function is not included.

The single-pair functions work on plain numpy arrays.  The batched sums
(:func:`induced_velocity`, :func:`pair_energy_matrix`) run in numba loops
that fix the accumulation order per target, so results do not depend on the
thread count.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .geometry import HelixGeometry, TWO_PI, dt_map, h_weight, h_weight_grad, perp, t_map


@dataclass(frozen=True)
class KernelParams:
    geom: HelixGeometry
    delta: float = 0.0

    def __post_init__(self):
        if not (self.delta >= 0 and math.isfinite(self.delta)):
            raise ValueError(f"blob radius must be >= 0, got {self.delta!r}")


def _separation2(x, y, params):
    d = t_map(x, params.geom) - t_map(y, params.geom)
    rho2 = np.sum(d * d, axis=-1)
    r2 = rho2 + params.delta ** 2
    if np.any(r2 == 0):
        raise ValueError("kernel evaluated at x == y with delta == 0")
    return d, r2


def g_sing(x, y, params: KernelParams):
    """Regularised singular Green's function ``H ln sqrt(rho^2 + delta^2)``."""
    _, r2 = _separation2(x, y, params)
    out = h_weight(x, y, params.geom) * 0.5 * np.log(r2)
    return float(out) if np.ndim(out) == 0 else out


def kernel_split(x, y, params: KernelParams):
    """Return the weight-gradient (log) term and the Biot-Savart-like term separately."""
    geom = params.geom
    d, r2 = _separation2(x, y, params)
    log_term = perp(h_weight_grad(x, y, geom)) * (0.5 * np.log(r2))[..., None]
    dt = dt_map(x, geom)
    biot = np.einsum("...ij,...j->...i", dt, d) / r2[..., None]
    biot_term = perp(biot) * np.asarray(h_weight(x, y, geom))[..., None]
    return log_term, biot_term


def velocity_kernel(x, y, params: KernelParams):
    """Perpendicular gradient in ``x`` of :func:`g_sing`."""
    log_term, biot_term = kernel_split(x, y, params)
    return log_term + biot_term


# ---------------------------------------------------------------------------
# batched evaluation

def particle_tables(z, h):
    """Per-point quantities reused by every pair: T(z), sqrt|Z|, grad sqrt|Z|, DT(z)."""
    z = np.ascontiguousarray(z, dtype=float).reshape(-1, 2)
    big = np.sqrt(np.sum(z * z, axis=1) + h * h)
    sq = np.sqrt(big)
    grad = z / (2.0 * big ** 1.5)[:, None]
    dt = dt_map(z, h)
    dt3 = np.ascontiguousarray(np.stack([dt[:, 0, 0], dt[:, 0, 1], dt[:, 1, 1]], axis=1))
    return np.ascontiguousarray(t_map(z, h)), sq, np.ascontiguousarray(grad), dt3


@numba.njit(parallel=True, cache=True, fastmath=False)
def _induced(tT, tsq, tgrad, tdt, sT, ssq, w, delta2, scale, exclude_self, out):
    nt = tT.shape[0]
    ns = sT.shape[0]
    for i in numba.prange(nt):
        ux = 0.0
        uy = 0.0
        a = tdt[i, 0]
        b = tdt[i, 1]
        c = tdt[i, 2]
        for j in range(ns):
            if exclude_self and i == j:
                continue
            dx = tT[i, 0] - sT[j, 0]
            dy = tT[i, 1] - sT[j, 1]
            r2 = dx * dx + dy * dy + delta2
            lg = 0.5 * math.log(r2)
            wj = w[j] * ssq[j] * scale
            hh = tsq[i] * wj / r2
            vx = a * dx + b * dy
            vy = b * dx + c * dy
            ux += -tgrad[i, 1] * wj * lg - hh * vy
            uy += tgrad[i, 0] * wj * lg + hh * vx
        out[i, 0] = ux
        out[i, 1] = uy


def induced_velocity(targets, sources, weights, geom: HelixGeometry, delta: float,
                     exclude_self: bool = False):
    """Sum ``w_q * velocity_kernel(x, z_q)`` over sources for each target.

    With ``exclude_self`` the targets must be the sources and the diagonal
    term is skipped.
    """
    h = geom.h
    tT, tsq, tgrad, tdt = particle_tables(targets, h)
    if exclude_self:
        if np.shape(targets) != np.shape(sources):
            raise ValueError("exclude_self requires targets == sources")
        sT, ssq = tT, tsq
    else:
        sT, ssq, _, _ = particle_tables(sources, h)
    w = np.ascontiguousarray(weights, dtype=float)
    if delta == 0.0 and not exclude_self:
        # a coincident target/source pair is singular
        d = tT[:, None, :] - sT[None, :, :]
        if np.any(np.all(d == 0.0, axis=-1)):
            raise ValueError("kernel evaluated at x == y with delta == 0")
    out = np.empty((tT.shape[0], 2))
    _induced(tT, tsq, tgrad, tdt, sT, ssq, w, float(delta) ** 2, 1.0 / (TWO_PI * h),
             bool(exclude_self), out)
    return out


@numba.njit(parallel=True, cache=True)
def _pair_rows(T, sq, w, comp, ncomp, delta2, scale, out):
    n = T.shape[0]
    for p in numba.prange(n):
        for q in range(n):
            if q == p:
                continue
            dx = T[p, 0] - T[q, 0]
            dy = T[p, 1] - T[q, 1]
            r2 = dx * dx + dy * dy + delta2
            out[p, comp[q]] += w[p] * w[q] * sq[p] * sq[q] * scale * 0.5 * math.log(r2)


def pair_energy_matrix(z, weights, component, ncomp, geom: HelixGeometry, delta: float):
    """``S[i, j] = sum over p in i, q in j, p != q of w_p w_q G(z_p, z_q)``."""
    T, sq, _, _ = particle_tables(z, geom.h)
    comp = np.ascontiguousarray(component, dtype=np.int64)
    rows = np.zeros((T.shape[0], ncomp))
    _pair_rows(T, sq, np.ascontiguousarray(weights, dtype=float), comp, ncomp,
               float(delta) ** 2, 1.0 / (TWO_PI * geom.h), rows)
    S = np.zeros((ncomp, ncomp))
    # fixed-order reduction over particles keeps the result thread-count independent
    for k in range(ncomp):
        S[k] = rows[comp == k].sum(axis=0)
    return S
