"""Functionals of a particle field: centres, moments, masses, energies, tracking error.

All double sums skip the diagonal ``p == q``.  Energies use the same
regularised singular kernel as the solver.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np

from .errors import DegenerateStrengthError
from .kernel import pair_energy_matrix


def _members(pf, i):
    sel = pf.component == i
    return pf.positions[sel], pf.weights[sel]


def component_mass(pf, i) -> float:
    """Total circulation of component ``i``, summed exactly."""
    return math.fsum(pf.weights[pf.component == i])


def center_of_vorticity(pf, i) -> np.ndarray:
    z, w = _members(pf, i)
    gamma = math.fsum(w)
    if gamma == 0:
        raise DegenerateStrengthError(f"component {i} has zero mass")
    return np.array([math.fsum(w * z[:, 0]), math.fsum(w * z[:, 1])]) / gamma


def moment_about(pf, i, q) -> float:
    z, w = _members(pf, i)
    d = z - np.asarray(q, dtype=float)
    return float(np.sum(np.abs(w) * np.sum(d * d, axis=1)))


def moment_of_inertia(pf, i) -> float:
    """``sum |w_p| |z_p - B_i|^2`` about the centre of vorticity."""
    return moment_about(pf, i, center_of_vorticity(pf, i))


def mass_outside(pf, i, center, R: float) -> float:
    """Absolute circulation of component ``i`` farther than ``R`` from ``center``."""
    if not R > 0:
        raise ValueError("radius must be positive")
    z, w = _members(pf, i)
    d = z - np.asarray(center, dtype=float)
    far = np.sum(d * d, axis=1) > R * R
    return math.fsum(np.abs(w[far]))


def mass_inside(pf, i, center, R: float) -> float:
    z, w = _members(pf, i)
    d = z - np.asarray(center, dtype=float)
    near = np.sum(d * d, axis=1) <= R * R
    return math.fsum(np.abs(w[near]))


@dataclass(frozen=True)
class EnergyDecomposition:
    total: float
    self_energy: np.ndarray  # E_i
    pair: np.ndarray  # symmetric E_{i,j}; diagonal holds E_i


def energy_decomposition(pf, delta: Optional[float] = None) -> EnergyDecomposition:
    """``E_i``, ``E_{i,j}`` and ``E = sum E_i + 2 sum_{i>j} E_{i,j}``.

    ``delta`` defaults to the field's blob radius; ``delta=0`` gives the
    unregularised pairwise energy (coincident particles are then an error).
    """
    d = pf.delta if delta is None else delta
    n = pf.n_components
    if d == 0:
        diff = pf.positions[:, None, :] - pf.positions[None, :, :]
        r2 = np.sum(diff * diff, axis=-1)
        np.fill_diagonal(r2, 1.0)
        if np.any(r2 == 0):
            raise ValueError("coincident particles with delta == 0")
    S = pair_energy_matrix(pf.positions, pf.weights, pf.component, n, pf.geom, d)
    pair = -0.5 * (S + S.T)
    self_e = np.diag(pair).copy()
    total = float(np.sum(self_e) + 2.0 * sum(pair[i, j] for i in range(n) for j in range(i)))
    return EnergyDecomposition(total, self_e, pair)


@numba.njit(cache=True)
def _concentration(z, w, cutoff, scale):
    n = z.shape[0]
    total = 0.0
    c2 = cutoff * cutoff
    for p in range(n):
        for q in range(n):
            if p == q:
                continue
            dx = z[p, 0] - z[q, 0]
            dy = z[p, 1] - z[q, 1]
            r2 = dx * dx + dy * dy
            if r2 >= c2:
                total += w[p] * w[q] * math.log(scale * math.sqrt(r2))
    return total


def concentration_functional(pf, i) -> float:
    """Sum over ordered pairs of component ``i`` separated by at least ``eps/ln(1/eps)``
    of ``w_p w_q ln(ln(1/eps) |z_p - z_q| / eps)``."""
    z, w = _members(pf, i)
    L = pf.log_eps
    return float(_concentration(np.ascontiguousarray(z), np.ascontiguousarray(w),
                                pf.epsilon / L, L / pf.epsilon))


def tracking_error(pf, reference, times=None) -> np.ndarray:
    """``ln(1/eps) |B_i - (x0 + P_i / ln(1/eps))|`` per component.

    ``reference`` holds the rescaled ODE centres ``P_i`` at the field's time;
    pass ``times=(t_field, t_reference)`` to have the match checked.
    """
    if times is not None and times[0] != times[1]:
        raise ValueError(f"field time {times[0]!r} != reference time {times[1]!r}")
    ref = np.asarray(reference, dtype=float).reshape(-1, 2)
    L = pf.log_eps
    x0 = pf.geom.x0
    out = np.empty(ref.shape[0])
    for i in range(ref.shape[0]):
        b = center_of_vorticity(pf, i)
        out[i] = L * np.hypot(*(b - (x0 + ref[i] / L)))
    return out


@dataclass
class DiagnosticsRecord:
    t: float
    centers: np.ndarray  # (N, 2)
    moments: np.ndarray
    mass_out: np.ndarray  # (N, n_radii)
    radii: np.ndarray
    self_energy: np.ndarray
    concentration: np.ndarray
    pair_energy: np.ndarray  # (N, N)
    total_energy: float
    tracking_error: Optional[np.ndarray] = None


def compute_record(pf, t: float, radii, reference=None) -> DiagnosticsRecord:
    n = pf.n_components
    radii = np.asarray(radii, dtype=float)
    centers = np.array([center_of_vorticity(pf, i) for i in range(n)])
    moments = np.array([moment_about(pf, i, centers[i]) for i in range(n)])
    mass_out = np.array([[mass_outside(pf, i, centers[i], R) for R in radii] for i in range(n)])
    energy = energy_decomposition(pf)
    conc = np.array([concentration_functional(pf, i) for i in range(n)])
    track = None if reference is None else tracking_error(pf, reference)
    return DiagnosticsRecord(float(t), centers, moments, mass_out, radii, energy.self_energy,
                             conc, energy.pair, energy.total, track)
