"""Invariant checks run by ``--self-check`` on the configured instance."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import blob as blobmod
from . import diagnostics
from . import leapfrog as lf
from .geometry import dt_map, g_coeff, k_matrix, t_map, tau
from .kernel import KernelParams, g_sing, velocity_kernel
from .pointvortex import OdeParams, OdeState, hamiltonian_total, rhs


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


def _fd_jacobian(f, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    cols = []
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        cols.append((f(x + e) - f(x - e)) / (2 * h))
    return np.stack(cols, axis=-1)


def check_geometry(geom, points):
    out = []
    worst = 0.0
    for x in np.asarray(points, dtype=float).reshape(-1, 2):
        J = _fd_jacobian(lambda z: t_map(z, geom), x)
        D = dt_map(x, geom)
        worst = max(worst, float(np.max(np.abs(J - D)) / np.max(np.abs(D))))
    out.append(Check("dt_map is the Jacobian of t_map", worst <= 1e-5, f"max rel err {worst:.2e}"))
    worst = 0.0
    for x in np.asarray(points, dtype=float).reshape(-1, 2):
        s = float(x @ x)
        worst = max(worst, abs(np.linalg.det(k_matrix(x, geom)) - geom.h ** 2 / (geom.h ** 2 + s)))
    out.append(Check("det K = h^2/(h^2+|x|^2)", worst <= 1e-12, f"max abs err {worst:.2e}"))
    worst = 0.0
    for x in np.asarray(points, dtype=float).reshape(-1, 2):
        s = float(x @ x)
        ref = math.exp(quad(lambda z: g_coeff(z, geom), 0.0, s, epsabs=1e-14, epsrel=1e-13)[0])
        worst = max(worst, abs(tau(s, geom) - ref) / ref)
    out.append(Check("tau closed form matches quadrature", worst <= 1e-10, f"max rel err {worst:.2e}"))
    ev = np.linalg.eigvalsh(geom.dt0)
    out.append(Check("DT(x0) positive definite", bool(ev.min() > 0), f"eigenvalues {ev}"))
    return out


def check_ode(params: OdeParams, state: OdeState):
    out = []
    a = params.strengths
    v = rhs(state, params)
    lhs = a @ v
    expect = np.array([0.0, -params.geom.B * np.sum(a * a)])
    err = float(np.max(np.abs(lhs - expect)))
    scale = max(1.0, float(np.max(np.abs(a[:, None] * v))))
    out.append(Check("strength-weighted velocity sum", err <= 1e-12 * scale, f"err {err:.2e}"))
    worst = 0.0
    h = 1e-6
    for i in range(a.size):
        g = np.zeros(2)
        for k in range(2):
            p1 = state.p_tilde.copy()
            p2 = state.p_tilde.copy()
            p1[i, k] += h
            p2[i, k] -= h
            g[k] = (hamiltonian_total(OdeState(0, p1), params)
                    - hamiltonian_total(OdeState(0, p2), params)) / (2 * h)
        pg = np.array([-g[1], g[0]])
        worst = max(worst, float(np.max(np.abs(pg - a[i] * v[i]))) / max(1.0, float(np.max(np.abs(v[i])))))
    out.append(Check("a_i rhs_i = perp grad H_tot", worst <= 1e-6, f"max err {worst:.2e}"))
    return out


def check_leapfrog(lp: lf.LeapfrogParams, x):
    out = []
    x = np.asarray(x, dtype=float)
    g = _fd_jacobian(lambda z: np.atleast_1d(lf.relative_hamiltonian(z, lp)), x)[0]
    pg = np.array([-g[1], g[0]])
    v = lf.relative_velocity(x, lp)
    err = float(np.max(np.abs(pg - v)) / max(1.0, np.max(np.abs(v))))
    out.append(Check("relative velocity = perp grad H", err <= 1e-6, f"err {err:.2e}"))
    xs = lp.x_star
    if xs is not None:
        gs = _fd_jacobian(lambda z: np.atleast_1d(lf.relative_hamiltonian(z, lp)), xs)[0]
        out.append(Check("grad H vanishes at x*", float(np.hypot(*gs)) <= 1e-8, f"|grad| {np.hypot(*gs):.2e}"))
    c_e = lf.level_of_point(x, lp)
    E = lf.relative_hamiltonian(x, lp)
    roots = lf.domain_roots(c_e, lp)
    if roots.kind == "periodic":
        x1 = np.linspace(roots.eta1, roots.eta2, 9)[1:-1]
        f = lf.level_curve(x1, c_e, lp)
        dev = float(np.max(np.abs(lf.relative_hamiltonian(np.stack([x1, f], 1), lp) - E)))
        out.append(Check("level curve lies on H = E", dev <= 1e-10 * max(1.0, abs(E)), f"dev {dev:.2e}"))
    return out


def check_blob(scenario: blobmod.Scenario):
    out = []
    pf = blobmod.init_patches(scenario)
    L2 = scenario.log_eps ** 2
    worst = 0.0
    for i, a in enumerate(scenario.strengths):
        worst = max(worst, abs(diagnostics.component_mass(pf, i) - a / L2) / abs(a / L2))
    out.append(Check("component masses exact", worst <= 1e-15, f"max rel err {worst:.2e}"))
    kp = KernelParams(scenario.geom, pf.delta)
    rng = np.random.default_rng(0)
    idx = rng.choice(len(pf), size=min(10, len(pf)), replace=False)
    worst_div = 0.0
    worst_grad = 0.0
    h = 1e-6
    for p in idx:
        x = pf.positions[p]
        y = pf.positions[(p + 7) % len(pf)] + 0.3 * pf.spacing
        J = _fd_jacobian(lambda z: velocity_kernel(z, y, kp), x, h)
        v = velocity_kernel(x, y, kp)
        scale = max(float(np.hypot(*v)), 1e-300)
        worst_div = max(worst_div, abs(J[0, 0] + J[1, 1]) * pf.spacing / scale)
        g = _fd_jacobian(lambda z: np.atleast_1d(g_sing(z, y, kp)), x, h)[0]
        worst_grad = max(worst_grad, float(np.max(np.abs(np.array([-g[1], g[0]]) - v))) / scale)
    out.append(Check("kernel divergence-free (FD)", worst_div <= 1e-4, f"max scaled div {worst_div:.2e}"))
    out.append(Check("kernel = perp grad g_sing (FD)", worst_grad <= 1e-5, f"max rel err {worst_grad:.2e}"))
    return out
