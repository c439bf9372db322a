import math

import numpy as np
from hypothesis import assume, given, settings, strategies as st

from helixvortex import diagnostics as dg, io
from helixvortex import leapfrog as lf
from helixvortex.blob import ParticleField
from helixvortex.geometry import HelixGeometry, dt_map, k_matrix, t_map, tau
from helixvortex.kernel import KernelParams, g_sing
from helixvortex.pointvortex import OdeParams, OdeState, from_physical, rhs, to_physical

pitch = st.floats(0.1, 10.0)
radius = st.floats(0.0, 5.0)
coord = st.floats(-10.0, 10.0)
point = st.tuples(coord, coord).map(np.array)
strength = st.floats(0.1, 5.0) | st.floats(-5.0, -0.1)

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@given(st.floats(0.0, 1e3), st.floats(0.0, 1e3), pitch)
def test_tau_monotone_and_at_least_one(s1, s2, h):
    lo, hi = sorted((s1, s2))
    assert 1.0 <= tau(lo, h) <= tau(hi, h)


@given(st.floats(0.0, 100.0), pitch)
def test_tau_scale_invariance(s, h):
    assert math.isclose(tau(s, h), tau(s / (h * h), 1.0), rel_tol=1e-12)


@given(point, pitch)
def test_matrices_spd_and_det(x, h):
    K = k_matrix(x, h)
    D = dt_map(x, h)
    assert np.min(np.linalg.eigvalsh(K)) > 0 and np.min(np.linalg.eigvalsh(D)) > 0
    assert abs(np.linalg.det(K) - h * h / (h * h + x @ x)) <= 1e-12


@given(point, st.floats(0, 2 * math.pi), pitch)
def test_t_map_equivariant(x, th, h):
    R = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    a = t_map(R @ x, h)
    b = R @ t_map(x, h)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12 * max(1.0, np.abs(b).max()))


@given(point, point, pitch, radius, st.floats(1e-4, 1.0))
def test_g_sing_symmetric(x, y, h, r0, delta):
    kp = KernelParams(HelixGeometry(h, r0), delta)
    assert g_sing(x, y, kp) == g_sing(y, x, kp)


@given(pitch, radius, st.lists(strength, min_size=1, max_size=6), st.integers(0, 2 ** 32 - 1))
def test_weighted_velocity_identity(h, r0, a, seed):
    g = HelixGeometry(h, r0)
    p = OdeParams(g, a)
    z = np.random.default_rng(seed).uniform(-3, 3, size=(len(a), 2))
    if len(a) > 1:
        d = np.hypot(*(z[:, None] - z[None]).transpose(2, 0, 1))
        assume(np.min(d + np.eye(len(a))) > 1e-3)
    v = rhs(OdeState(0, z), p)
    aa = np.asarray(a)
    scale = max(1.0, float(np.max(np.abs(aa[:, None] * v))))
    assert np.allclose(aa @ v, [0.0, -g.B * np.sum(aa * aa)], rtol=0, atol=1e-12 * scale * len(a))


@given(pitch, radius, st.integers(0, 2 ** 32 - 1))
def test_physical_round_trip(h, r0, seed):
    p = OdeParams(HelixGeometry(h, r0), [1.0, 2.0, 3.0])
    P = np.random.default_rng(seed).normal(size=(3, 2))
    assert np.max(np.abs(to_physical(from_physical(P, p), p) - P)) <= 1e-14 * max(1.0, np.abs(P).max())


@given(pitch, st.floats(0.05, 3.0), st.floats(0.2, 5.0), st.floats(-0.95, 0.95),
       st.floats(1e-6, 0.995))
def test_root_classification(h, r0, a1, ratio, frac):
    a2 = ratio * a1
    assume(a2 != 0 and a1 != a2)
    lp = lf.LeapfrogParams(HelixGeometry(h, r0), a1, a2)
    c = frac * lp.c_star
    r = lf.domain_roots(c, lp)
    assert r.kind == "periodic"
    lo, hi = sorted((0.0, 2 * lp.a_prime))
    assert r.eta1 < 0 < r.eta2
    assert (r.eta2 < 2 * lp.a_prime < r.eta3) if lp.a_prime > 0 else (r.eta3 < 2 * lp.a_prime < r.eta1)
    for x in r.roots:
        assert abs(lf.level_residual(x, c, lp)) <= 1e-12 * max(1.0, x * x)
    assert lf.domain_roots(c / frac * 1.5, lp).kind == "unbounded"


@given(pitch, st.floats(0.05, 3.0), st.floats(1e-6, 0.99))
def test_period_exceeds_small_level_value(h, r0, frac):
    lp = lf.LeapfrogParams(HelixGeometry(h, r0), 2.0, 1.0)
    c = frac * lp.c_star
    assert lf.period_quadrature(c, lp) >= lf.small_level_period(c, lp) * (1 - 1e-9)


@given(st.floats(-50, 50), st.floats(0.0, 10.0))
def test_level_constant_monotone(E, dE):
    lp = lf.LeapfrogParams(HelixGeometry(1.0, 1.0), 2.0, 1.0)
    assume(dE > 1e-6)
    assert lf.level_constant(E + dE, lp) > lf.level_constant(E, lp)


@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 40), st.integers(1, 3))
def test_energy_identity_and_mass_monotone(seed, n, ncomp):
    rng = np.random.default_rng(seed)
    z = rng.uniform(0.5, 1.5, size=(n, 2))
    comp = np.arange(n) % ncomp
    w = rng.uniform(0.1, 1.0, n)
    pf = ParticleField(z, w, comp, 0.01, 0.05, HelixGeometry(1.0, 1.0))
    ed = dg.energy_decomposition(pf)
    k = pf.n_components
    recomposed = ed.self_energy.sum() + 2 * sum(ed.pair[i, j] for i in range(k) for j in range(i))
    assert math.isclose(ed.total, recomposed, rel_tol=1e-12, abs_tol=1e-15)
    c = dg.center_of_vorticity(pf, 0)
    radii = np.sort(rng.uniform(1e-3, 1.0, 8))
    out = [dg.mass_outside(pf, 0, c, R) for R in radii]
    assert all(a >= b for a, b in zip(out, out[1:]))


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_text_round_trip(v):
    assert float(io.fmt(v)) == v
