"""Vortex-blob discretisation of the reduced helical Euler equation.

Vorticity is carried by particles with fixed circulations that are advected
by the regularised kernel velocity; the field is divergence free, so the
weights never change.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import diagnostics
from .errors import NonFiniteStateError, HelixVortexError
from .geometry import HelixGeometry
from .integrators import rk4_step
from .kernel import induced_velocity
from .pointvortex import OdeParams, from_physical, rhs as ode_rhs, to_physical, OdeState


@dataclass(frozen=True)
class ParticleField:
    positions: np.ndarray
    weights: np.ndarray
    component: np.ndarray  # 0-based vortex index
    delta: float
    epsilon: float
    geom: HelixGeometry
    spacing: float = float("nan")
    strengths: Optional[np.ndarray] = None

    @property
    def n_components(self) -> int:
        return int(self.component.max()) + 1 if self.component.size else 0

    @property
    def log_eps(self) -> float:
        """``ln(1/eps)``."""
        return math.log(1.0 / self.epsilon)

    def __len__(self):
        return self.positions.shape[0]


@dataclass
class Scenario:
    geom: HelixGeometry
    strengths: Sequence[float]
    centers: Sequence[Sequence[float]]  # rescaled physical P_i^0
    epsilon: float
    n_side: int = 16
    delta_factor: float = 1.5
    dt: Optional[float] = None
    cfl: float = 0.2
    t_final: float = 0.0
    cadence: int = 1
    mass_radii: Sequence[float] = (1.5, 3.0)  # in units of epsilon

    def __post_init__(self):
        self.strengths = np.asarray(self.strengths, dtype=float).reshape(-1)
        self.centers = np.asarray(self.centers, dtype=float).reshape(-1, 2)
        if self.centers.shape[0] != self.strengths.size:
            raise ValueError("one centre per strength is required")
        if np.any(self.strengths == 0):
            raise ValueError("strengths must be nonzero")
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.n_side < 8:
            raise ValueError("n_side must be at least 8")
        if not self.delta_factor > 0:
            raise ValueError("delta_factor must be positive")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.t_final < 0 or self.cadence < 1:
            raise ValueError("t_final must be >= 0 and cadence >= 1")
        c = self.centers
        for i in range(len(c)):
            for j in range(i + 1, len(c)):
                if np.all(c[i] == c[j]):
                    raise ValueError(f"initial centres {i + 1} and {j + 1} coincide")

    @property
    def log_eps(self) -> float:
        return math.log(1.0 / self.epsilon)

    @property
    def spacing(self) -> float:
        return 2.0 * self.epsilon / self.n_side

    def patch_centers(self) -> np.ndarray:
        """Physical patch centres ``x0 + P_i^0 / ln(1/eps)``."""
        return self.geom.x0 + self.centers / self.log_eps

    def ode_params(self) -> OdeParams:
        return OdeParams(self.geom, self.strengths)


def lattice_offsets(epsilon: float, n_side: int) -> np.ndarray:
    """Cell centres of an ``n_side x n_side`` lattice covering ``[-eps, eps]^2`` inside the disk."""
    sp = 2.0 * epsilon / n_side
    k = (np.arange(n_side) - 0.5 * (n_side - 1)) * sp
    X, Y = np.meshgrid(k, k, indexing="xy")
    keep = X * X + Y * Y <= epsilon * epsilon
    return np.stack([X[keep], Y[keep]], axis=1)


def init_patches(scenario: Scenario) -> ParticleField:
    """Uniform patches of radius ``eps`` with component mass ``a_i / ln(1/eps)^2``."""
    centers = scenario.patch_centers()
    eps = scenario.epsilon
    for i in range(len(centers)):
        for j in range(i + 1, len(centers)):
            if np.hypot(*(centers[i] - centers[j])) < 2.0 * eps:
                raise ValueError(f"initial disks {i + 1} and {j + 1} overlap")
    offsets = lattice_offsets(eps, scenario.n_side)
    m = offsets.shape[0]
    L2 = scenario.log_eps ** 2
    pos, w, comp = [], [], []
    for i, (c, a) in enumerate(zip(centers, scenario.strengths)):
        pos.append(c + offsets)
        # every kept cell has the same area, so the mass split is uniform
        w.append(np.full(m, (a / L2) / m))
        comp.append(np.full(m, i, dtype=np.int64))
    sp = scenario.spacing
    return ParticleField(
        positions=np.concatenate(pos),
        weights=np.concatenate(w),
        component=np.concatenate(comp),
        delta=scenario.delta_factor * sp,
        epsilon=eps,
        geom=scenario.geom,
        spacing=sp,
        strengths=np.asarray(scenario.strengths, dtype=float),
    )


def velocity_field(pf: ParticleField, x) -> np.ndarray:
    """Velocity induced by all particles at the point(s) ``x``."""
    x = np.asarray(x, dtype=float)
    out = induced_velocity(x.reshape(-1, 2), pf.positions, pf.weights, pf.geom, pf.delta)
    return out.reshape(x.shape)


def particle_velocities(pf: ParticleField, positions=None) -> np.ndarray:
    """Velocity at every particle, self-interaction excluded."""
    z = pf.positions if positions is None else positions
    return induced_velocity(z, z, pf.weights, pf.geom, pf.delta, exclude_self=True)


def step(pf: ParticleField, dt: float) -> ParticleField:
    """One RK4 step of the particle positions."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    def f(p):
        if not np.all(np.isfinite(p)):
            raise NonFiniteStateError("non-finite particle positions; reduce dt")
        return particle_velocities(pf, p)

    z = rk4_step(f, pf.positions, dt)
    if not np.all(np.isfinite(z)):
        raise NonFiniteStateError("non-finite particle positions; reduce dt")
    return replace(pf, positions=z)


def default_dt(pf: ParticleField, cfl: float = 0.2) -> float:
    """``cfl * spacing / max |v|`` over the initial particles."""
    v = particle_velocities(pf)
    vmax = float(np.max(np.hypot(v[:, 0], v[:, 1]))) if len(pf) else 0.0
    if vmax == 0:
        return cfl * pf.spacing
    return cfl * pf.spacing / vmax


@dataclass
class BlobRun:
    scenario: Scenario
    dt: float
    n_steps: int
    records: list = field(default_factory=list)
    dumps: list = field(default_factory=list)  # (t, positions)
    ode_times: Optional[np.ndarray] = None
    ode_p_tilde: Optional[np.ndarray] = None
    status: str = "ok"
    error: Optional[str] = None
    particle_count: int = 0
    wall_clock: float = 0.0
    final: Optional[ParticleField] = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def n_steps_for(t_final: float, dt: float) -> int:
    return int(math.floor(t_final / dt + 1e-9))


def run(scenario: Scenario, with_reference: bool = True, dump_particles: bool = False,
        progress=None) -> BlobRun:
    """Initialise, step to ``t_final`` and record diagnostics every ``cadence`` steps.

    With ``with_reference`` the point-vortex system is integrated in lockstep
    (same ``dt``) and every record carries tracking errors.  A failure stops
    the run; the records up to that point are kept and ``status`` is set to
    ``"failed"``.
    """
    t_start = time.perf_counter()
    pf = init_patches(scenario)
    dt = scenario.dt if scenario.dt is not None else default_dt(pf, scenario.cfl)
    n_steps = n_steps_for(scenario.t_final, dt)
    out = BlobRun(scenario, dt, n_steps, particle_count=len(pf))
    radii = np.asarray(scenario.mass_radii, dtype=float) * scenario.epsilon

    ode_p = OdeParams(scenario.geom, scenario.strengths)
    ode_state = from_physical(scenario.centers, ode_p).p_tilde
    ode_f = lambda p: ode_rhs(OdeState(0.0, p), ode_p)
    ode_t, ode_hist = [], []

    def record(k, pf, p_tilde):
        t = k * dt
        ref = None
        if with_reference:
            ref = to_physical(OdeState(t, p_tilde), ode_p)
            ode_t.append(t)
            ode_hist.append(p_tilde.copy())
        out.records.append(diagnostics.compute_record(pf, t, radii, ref))
        if dump_particles:
            out.dumps.append((t, pf.positions.copy()))

    try:
        record(0, pf, ode_state)
        for k in range(1, n_steps + 1):
            pf = step(pf, dt)
            if with_reference:
                ode_state = rk4_step(ode_f, ode_state, dt)
            if k % scenario.cadence == 0:
                record(k, pf, ode_state)
            if progress is not None:
                progress(k, n_steps)
    except HelixVortexError as exc:
        out.status = "failed"
        out.error = f"{type(exc).__name__}: {exc}"
    out.final = pf
    if with_reference:
        out.ode_times = np.asarray(ode_t)
        out.ode_p_tilde = np.asarray(ode_hist)
    out.wall_clock = time.perf_counter() - t_start
    return out
