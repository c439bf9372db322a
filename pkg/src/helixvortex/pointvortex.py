"""Limiting N-vortex system in the transformed coordinates ``P~ = DT(x0) P``.

    dP~_i/dt = A sum_{j != i} a_j (P~_i - P~_j)^perp / |P~_i - P~_j|^2 - a_i B e_2
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CollisionError, DegenerateStrengthError, NonFiniteStateError
from .geometry import HelixGeometry, perp
from .integrators import rk4_path

COLLISION_FLOOR = 1e-8


@dataclass(frozen=True)
class OdeParams:
    geom: HelixGeometry
    strengths: np.ndarray

    def __post_init__(self):
        a = np.array(self.strengths, dtype=float).reshape(-1)
        if a.size < 1:
            raise ValueError("at least one vortex is required")
        if np.any(a == 0) or not np.all(np.isfinite(a)):
            raise ValueError("every strength must be finite and nonzero")
        a.setflags(write=False)
        object.__setattr__(self, "strengths", a)

    @property
    def n(self) -> int:
        return self.strengths.size


@dataclass(frozen=True)
class OdeState:
    t: float
    p_tilde: np.ndarray

    def __post_init__(self):
        p = np.array(self.p_tilde, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "p_tilde", p)
        object.__setattr__(self, "t", float(self.t))


@dataclass
class Trajectory:
    """Dense trajectory: ``p_tilde[k]`` is the state at ``times[k]``."""

    times: np.ndarray
    p_tilde: np.ndarray

    def state(self, k: int) -> OdeState:
        return OdeState(self.times[k], self.p_tilde[k])

    def __len__(self):
        return len(self.times)


def _closest_pair(p):
    n = p.shape[0]
    if n < 2:
        return None, np.inf
    d = p[:, None, :] - p[None, :, :]
    r = np.sqrt(np.sum(d * d, axis=-1))
    r[np.diag_indices(n)] = np.inf
    k = int(np.argmin(r))
    i, j = divmod(k, n)
    return (min(i, j), max(i, j)), float(r[i, j])


def _velocities(p, a, A, B):
    d = p[:, None, :] - p[None, :, :]
    r2 = np.sum(d * d, axis=-1)
    np.fill_diagonal(r2, np.inf)
    if np.any(r2 == 0):
        (i, j), _ = _closest_pair(p)
        raise CollisionError(i, j, 0.0)
    inter = np.sum(a[None, :, None] * perp(d) / r2[..., None], axis=1)
    v = A * inter
    v[:, 1] -= a * B
    return v


def rhs(state: OdeState, params: OdeParams) -> np.ndarray:
    """Velocities ``dP~_i/dt`` as an ``(N, 2)`` array."""
    g = params.geom
    return _velocities(state.p_tilde, params.strengths, g.A, g.B)


def to_physical(state: OdeState, params: OdeParams) -> np.ndarray:
    """Rescaled physical centres ``P_i = DT(x0)^{-1} P~_i``."""
    return state.p_tilde @ params.geom.dt0_inv.T


def from_physical(p, params: OdeParams, t: float = 0.0) -> OdeState:
    p = np.asarray(p, dtype=float).reshape(-1, 2)
    return OdeState(t, p @ params.geom.dt0.T)


def integrate(state: OdeState, params: OdeParams, dt: float, n_steps: int,
              collision_floor: float = COLLISION_FLOOR) -> Trajectory:
    """Fixed-step RK4 integration, sampling every step.

    Raises :class:`CollisionError` or :class:`NonFiniteStateError`; either
    carries the trajectory computed up to the failure as ``.trajectory``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    g = params.geom
    a = params.strengths
    p0 = state.p_tilde
    if p0.shape[0] != a.size:
        raise ValueError(f"state has {p0.shape[0]} centres but {a.size} strengths")
    pair, dmin = _closest_pair(p0)
    if dmin < collision_floor:
        exc = CollisionError(*pair, dmin, t=state.t)
        exc.trajectory = Trajectory(np.array([state.t]), p0[None].copy())
        raise exc

    def f(p):
        return _velocities(p, a, g.A, g.B)

    def check(k, p):
        if not np.all(np.isfinite(p)):
            raise NonFiniteStateError(f"non-finite state at t={state.t + k * dt!r}; reduce dt")
        pair, dmin = _closest_pair(p)
        if dmin < collision_floor:
            raise CollisionError(*pair, dmin, t=state.t + k * dt)

    try:
        path = rk4_path(f, p0, dt, int(n_steps), check)
    except (CollisionError, NonFiniteStateError) as exc:
        part = getattr(exc, "partial", p0[None])
        exc.trajectory = Trajectory(state.t + dt * np.arange(len(part)), part)
        raise
    return Trajectory(state.t + dt * np.arange(n_steps + 1), path)


def hamiltonian_total(state: OdeState, params: OdeParams) -> float:
    """``(A/2) sum_{i != j} a_i a_j ln|P~_i - P~_j| - B sum_i a_i^2 (P~_i)_1``.

    ``a_i dP~_i/dt`` is the perpendicular gradient of this with respect to ``P~_i``.
    """
    g = params.geom
    a = params.strengths
    p = state.p_tilde
    n = a.size
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            r = np.hypot(*(p[i] - p[j]))
            if r == 0:
                raise CollisionError(i, j, 0.0, t=state.t)
            total += a[i] * a[j] * np.log(r)
    return float(g.A * total - g.B * np.sum(a * a * p[:, 0]))


def weighted_centroid(state: OdeState, params: OdeParams, normalized: bool = False):
    """``sum_i a_i P~_i``, or divided by ``sum_i a_i`` when ``normalized``."""
    a = params.strengths
    s = a @ state.p_tilde
    if not normalized:
        return s
    total = a.sum()
    if total == 0:
        raise DegenerateStrengthError("total strength vanishes; the centroid is undefined")
    return s / total
