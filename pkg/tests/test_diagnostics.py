import math

import numpy as np
import pytest

from helixvortex import blob, diagnostics as dg
from helixvortex.errors import DegenerateStrengthError
from helixvortex.geometry import HelixGeometry, h_weight, t_map
from helixvortex.kernel import KernelParams, g_sing

from conftest import TWO_VORTEX_CENTERS


def field(z, w, comp=None, delta=0.01, eps=0.05, geom=None):
    z = np.asarray(z, dtype=float).reshape(-1, 2)
    w = np.asarray(w, dtype=float)
    comp = np.zeros(len(w), dtype=np.int64) if comp is None else np.asarray(comp, dtype=np.int64)
    return blob.ParticleField(z, w, comp, delta, eps, geom or HelixGeometry(1.0, 1.0))


def random_field(seed, n=40, ncomp=2):
    rng = np.random.default_rng(seed)
    z = rng.uniform(0.8, 1.2, size=(n, 2))
    comp = np.arange(n) % ncomp
    w = rng.uniform(0.1, 1.0, n) * np.where(comp == 0, 1.0, -1.0)
    return field(z, w, comp, delta=0.005)


def patch_field(eps=0.01, n_side=16, centers=TWO_VORTEX_CENTERS):
    sc = blob.Scenario(HelixGeometry(1.0, 1.0), [2.0, 1.0], centers, epsilon=eps, n_side=n_side)
    return sc, blob.init_patches(sc)


class TestCenters:
    def test_single_particle(self):
        pf = field([[0.3, 0.7]], [2.0])
        assert np.array_equal(dg.center_of_vorticity(pf, 0), [0.3, 0.7])
        assert dg.moment_of_inertia(pf, 0) == 0.0

    def test_pair(self):
        pf = field([[0.0, 0.0], [0.5, 0.0]], [1.0, 1.0])
        assert np.array_equal(dg.center_of_vorticity(pf, 0), [0.25, 0.0])
        assert dg.moment_of_inertia(pf, 0) == pytest.approx(0.25 / 2, rel=1e-15)

    def test_patch_center(self):
        sc, pf = patch_field()
        for i, c in enumerate(sc.patch_centers()):
            assert np.hypot(*(dg.center_of_vorticity(pf, i) - c)) <= 0.5 * sc.spacing

    def test_zero_mass(self):
        pf = field([[0.0, 0.0], [1.0, 0.0]], [1.0, -1.0])
        with pytest.raises(DegenerateStrengthError):
            dg.center_of_vorticity(pf, 0)

    def test_moment_is_minimum(self):
        rng = np.random.default_rng(0)
        pf = random_field(1)
        for i in range(2):
            b = dg.center_of_vorticity(pf, i)
            J = dg.moment_of_inertia(pf, i)
            assert J >= 0
            assert J <= dg.moment_about(pf, i, b + np.array([0.01, 0.0]))
            for q in b + rng.normal(scale=0.05, size=(100, 2)):
                assert J <= dg.moment_about(pf, i, q) * (1 + 1e-12)


class TestMass:
    def test_limits(self):
        pf = random_field(2)
        for i in range(2):
            total = math.fsum(np.abs(pf.weights[pf.component == i]))
            c = dg.center_of_vorticity(pf, i)
            assert dg.mass_outside(pf, i, c, 10.0) == 0.0
            assert dg.mass_outside(pf, i, c, 1e-12) == pytest.approx(total, rel=1e-15)

    def test_monotone_and_complement(self):
        pf = random_field(3)
        for i in range(2):
            c = dg.center_of_vorticity(pf, i)
            total = math.fsum(np.abs(pf.weights[pf.component == i]))
            radii = np.linspace(0.001, 0.4, 60)
            out = [dg.mass_outside(pf, i, c, R) for R in radii]
            assert np.all(np.diff(out) <= 0)
            for R in radii:
                assert dg.mass_outside(pf, i, c, R) + dg.mass_inside(pf, i, c, R) == pytest.approx(total, rel=1e-15)

    def test_bad_radius(self):
        with pytest.raises(ValueError):
            dg.mass_outside(random_field(0), 0, [0, 0], 0.0)


class TestEnergy:
    def test_matches_direct_sum(self):
        pf = random_field(4, n=12)
        kp = KernelParams(pf.geom, pf.delta)
        ed = dg.energy_decomposition(pf)
        ref = np.zeros((2, 2))
        for p in range(12):
            for q in range(12):
                if p != q:
                    ref[pf.component[p], pf.component[q]] -= pf.weights[p] * pf.weights[q] * g_sing(
                        pf.positions[p], pf.positions[q], kp)
        assert ed.pair == pytest.approx(ref, rel=1e-12)
        assert ed.self_energy == pytest.approx(np.diag(ref), rel=1e-12)

    def test_identity(self):
        pf = random_field(5, n=60, ncomp=3)
        ed = dg.energy_decomposition(pf)
        recomposed = ed.self_energy.sum() + 2 * sum(ed.pair[i, j] for i in range(3) for j in range(i))
        assert ed.total == pytest.approx(recomposed, rel=1e-12)
        assert np.array_equal(ed.pair, ed.pair.T)

    def test_single_particle_component(self):
        pf = field([[1.0, 0.0], [1.2, 0.0], [1.25, 0.0]], [1.0, 0.5, 0.5], [0, 1, 1])
        assert dg.energy_decomposition(pf).self_energy[0] == 0.0

    @pytest.mark.parametrize("k", [20, 60])
    def test_far_patches_point_vortex_coupling(self, k):
        eps = 0.01
        sep = k * eps * math.log(1 / eps)
        sc, pf = patch_field(eps, 12, [[sep / 2, 0.0], [-sep / 2, 0.0]])
        ed = dg.energy_decomposition(pf)
        c = sc.patch_centers()
        gam = np.asarray(sc.strengths) / sc.log_eps ** 2
        rho = np.hypot(*(t_map(c[0], sc.geom) - t_map(c[1], sc.geom)))
        est = -gam[0] * gam[1] * h_weight(c[0], c[1], sc.geom) * math.log(rho)
        assert ed.pair[0, 1] == pytest.approx(est, rel=2e-3)
        # per unit strength the coupling is the log-distance ratio, well below the self term
        coupling = abs(ed.pair[0, 1]) / (abs(gam[0] * gam[1]))
        self_unit = ed.self_energy / gam ** 2
        assert coupling < 0.3 * np.min(self_unit)

    def test_unregularised_mode(self):
        pf = random_field(6, n=10)
        a = dg.energy_decomposition(pf, delta=0.0)
        b = dg.energy_decomposition(pf, delta=1e-9)
        assert a.total == pytest.approx(b.total, rel=1e-9)
        dup = field([[1.0, 0.0], [1.0, 0.0]], [1.0, 1.0])
        with pytest.raises(ValueError):
            dg.energy_decomposition(dup, delta=0.0)


class TestConcentration:
    def test_all_close(self):
        eps = 0.05
        L = math.log(1 / eps)
        pf = field([[1.0, 0.0], [1.0 + 0.3 * eps / L, 0.0]], [1.0, 1.0], eps=eps)
        assert dg.concentration_functional(pf, 0) == 0.0

    def test_two_particles_at_e(self):
        eps = 0.05
        L = math.log(1 / eps)
        d = math.e * eps / L
        w = 0.3
        pf = field([[1.0, 0.0], [1.0, d]], [w, w], eps=eps)
        assert dg.concentration_functional(pf, 0) == pytest.approx(2 * w * w, rel=1e-12)

    def test_patch_small(self):
        sc, pf = patch_field(0.01, 16)
        L = sc.log_eps
        for i, a in enumerate(sc.strengths):
            g = dg.concentration_functional(pf, i)
            gamma = a / L ** 2
            assert 0 < g < 0.5 * gamma ** 2 * L


class TestTracking:
    def test_initial_bound(self):
        sc, pf = patch_field(0.01, 16)
        err = dg.tracking_error(pf, sc.centers)
        assert np.all(err <= sc.log_eps * 0.5 * sc.spacing)

    def test_exact_match(self):
        geom = HelixGeometry(1.0, 1.0)
        eps = 0.05
        L = math.log(1 / eps)
        P = np.array([[0.5, -0.25], [-1.0, 0.75]])
        z = geom.x0 + P / L
        pf = field(z, [1.0, 2.0], [0, 1], eps=eps, geom=geom)
        assert np.max(dg.tracking_error(pf, P)) <= 1e-14

    def test_time_mismatch(self):
        sc, pf = patch_field(0.05, 8)
        with pytest.raises(ValueError):
            dg.tracking_error(pf, sc.centers, times=(0.0, 0.1))


def test_record_is_pure():
    sc, pf = patch_field(0.05, 8)
    radii = np.array([1.5, 3.0]) * sc.epsilon
    a = dg.compute_record(pf, 0.0, radii, sc.centers)
    b = dg.compute_record(pf, 0.0, radii, sc.centers)
    for name in ("centers", "moments", "mass_out", "self_energy", "concentration", "pair_energy",
                 "tracking_error"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    assert a.total_energy == b.total_energy
    assert np.all(np.diff(a.mass_out, axis=1) <= 0)
