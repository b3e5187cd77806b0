import numpy as np
import pytest
from scipy import integrate, special

from fastboltz.errors import QuadratureError
from fastboltz.kernels import (VhsKernel, phi2_profile, phi3_profile,
                               precompute_beta_classical, precompute_beta_fast,
                               psi3_profile)
from fastboltz.velocity import VelocityGrid

MAXWELL = VhsKernel.maxwell_2d()


def _mode_index(table, k):
    return int(np.nonzero(np.all(table.modes == np.asarray(k), axis=1))[0][0])


class TestClassicalTable:
    def test_zero_mode_is_ball_measure(self, classical_table16, grid16):
        # with the angular kernel mass normalized to one, beta(0,0) is the
        # area of the truncation ball
        i0 = _mode_index(classical_table16, (0, 0))
        assert classical_table16.beta[i0, i0] == pytest.approx(
            np.pi * grid16.R**2, rel=1e-12)

    def test_symmetry_under_argument_swap(self, classical_table16):
        b = classical_table16.beta
        rng = np.random.default_rng(0)
        idx = rng.integers(0, b.shape[0], size=(32, 2))
        for i, j in idx:
            assert b[i, j] == pytest.approx(b[j, i], abs=1e-12 * abs(b[0, 0]))

    def test_diag_matches_table_diagonal(self, classical_table16):
        t = classical_table16
        assert np.allclose(t.diag, np.diag(t.beta), rtol=0, atol=1e-10)

    def test_hard_sphere_modes_match_adaptive_bessel_oracle(self):
        # reduce the defining integral over (angle of u, sigma) analytically
        # to Bessel functions and integrate radially with an adaptive rule;
        # compare the tensor-quadrature table against it
        grid = VelocityGrid(2, 8, 8.0)
        kernel = VhsKernel(gamma=1.0, c_gamma=1.0 / (2 * np.pi))
        table = precompute_beta_classical(grid, kernel, n_radial=48,
                                          n_angle=96)
        R, L = table.R, grid.L
        rng = np.random.default_rng(1)
        sample = rng.integers(0, table.n_modes, size=(8, 2))
        for i, j in sample:
            l, m = table.modes[i], table.modes[j]
            a = np.pi * np.linalg.norm(l + m) / (2 * L)
            b = np.pi * np.linalg.norm(l - m) / (2 * L)
            val, err = integrate.quad(
                lambda r: r**2 * special.j0(a * r) * special.j0(b * r),
                0.0, R, limit=400, epsabs=1e-12, epsrel=1e-12)
            ref = kernel.c_gamma * (2 * np.pi) ** 2 * val
            assert table.beta[i, j] == pytest.approx(
                ref, abs=1e-8 * abs(table.beta[0, 0]) + 1e-12)

    def test_self_check_flags_hopeless_quadrature(self, grid16):
        with pytest.raises(QuadratureError):
            precompute_beta_classical(grid16, MAXWELL, n_radial=2, n_angle=4,
                                      check_tol=1e-8)

    def test_requires_2d(self):
        with pytest.raises(ValueError):
            precompute_beta_classical(VelocityGrid(3, 8, 8.0), MAXWELL)


class TestFastTable2D:
    def test_segment_transform_at_zero(self, grid16):
        assert phi2_profile(0.0, grid16.R, grid16.L) == pytest.approx(
            2.0 * grid16.R)

    def test_zero_mode_value(self, fast_table16, grid16):
        # beta_f(0,0) = B_f * pi * (2R)^2 = 4 R^2 for the unit-mass kernel
        i0 = _mode_index(fast_table16, (0, 0))
        val = fast_table16.dense_beta(np.array([i0]), np.array([i0]))[0, 0]
        assert val == pytest.approx(4.0 * grid16.R**2, rel=1e-12)

    def test_against_direct_double_integral(self, fast_table16, grid16):
        # direct quadrature of the defining orthogonal-pair integral
        # (polar parametrization of the delta constraint), Gauss-Legendre
        # in both line variables and a dense uniform angle grid
        R, L = fast_table16.R, grid16.L
        bf = MAXWELL.carleman_constant(2)
        x, w = np.polynomial.legendre.leggauss(128)
        rho, wr = R * x, R * w
        theta = np.pi * (np.arange(2048) + 0.5) / 2048
        pairs = [((0, 0), (0, 0)), ((1, 0), (0, 1)), ((2, 1), (1, 1))]
        for lv, mv in pairs:
            e = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
            ep = np.stack([-np.sin(theta), np.cos(theta)], axis=-1)
            sum_l = (wr[None, :] * np.exp(
                1j * np.pi / L * np.outer(e @ np.asarray(lv), rho))).sum(axis=1)
            sum_m = (wr[None, :] * np.exp(
                1j * np.pi / L * np.outer(ep @ np.asarray(mv), rho))).sum(axis=1)
            ref = bf * np.pi / theta.size * np.real(sum_l * sum_m).sum()
            il, im = _mode_index(fast_table16, lv), _mode_index(fast_table16, mv)
            val = fast_table16.dense_beta(np.array([il]), np.array([im]))[0, 0]
            assert abs(val - ref) <= 1e-6 * abs(
                fast_table16.dense_beta(np.array([_mode_index(fast_table16, (0, 0))]),
                                        np.array([_mode_index(fast_table16, (0, 0))]))[0, 0])

    def test_lattice_exact_symmetry_classes(self, fast_table16):
        # pairs related by grid-exact maps (component swaps, sign flips,
        # quarter turns) share their kernel mode to round-off at any angle
        # count
        t = fast_table16
        groups = [
            [((1, 2), (2, -1)), ((2, 1), (1, -2)), ((-1, -2), (-2, 1)),
             ((2, -1), (-1, -2))],
            [((3, 0), (0, 5)), ((0, 3), (5, 0)), ((0, 3), (-5, 0))],
        ]
        for group in groups:
            vals = []
            for lv, mv in group:
                il, im = _mode_index(t, lv), _mode_index(t, mv)
                vals.append(t.dense_beta(np.array([il]), np.array([im]))[0, 0])
            scale = max(abs(v) for v in vals)
            assert max(vals) - min(vals) <= 1e-10 * scale

    def test_invariance_classes_at_converged_angles(self, grid16):
        # kernel modes depend only on (|l|, |m|, |l.m|); for pairs not
        # related by lattice symmetries this holds up to the angular
        # quadrature, so test on a rotation-converged table
        table = precompute_beta_fast(grid16, MAXWELL, m_angles=256)
        same_class = [(((3, 4), (0, 5)), ((5, 0), (4, 3))),
                      (((3, 4), (5, 0)), ((5, 0), (3, 4)))]
        for (l1, m1), (l2, m2) in same_class:
            a = table.dense_beta(np.array([_mode_index(table, l1)]),
                                 np.array([_mode_index(table, m1)]))[0, 0]
            b = table.dense_beta(np.array([_mode_index(table, l2)]),
                                 np.array([_mode_index(table, m2)]))[0, 0]
            assert a == pytest.approx(b, rel=1e-10)

    def test_self_check_flags_tiny_angle_count(self, grid16):
        with pytest.raises(QuadratureError):
            precompute_beta_fast(grid16, MAXWELL, m_angles=4, check_tol=1e-6)


class TestFastTable3D:
    def test_weighted_line_transform_at_zero(self):
        g = VelocityGrid(3, 8, 8.0)
        assert phi3_profile(0.0, g.R, g.L) == pytest.approx(g.R**2)

    def test_half_circle_average_at_zero(self):
        g = VelocityGrid(3, 8, 8.0)
        assert psi3_profile(0.0, g.R, g.L) == pytest.approx(np.pi * g.R**2)

    def test_zero_mode_value(self):
        g = VelocityGrid(3, 8, 8.0)
        kern = VhsKernel.hard_spheres_3d()
        table = precompute_beta_fast(g, kern, m_angles=(32, 32),
                                     self_check=False)
        i0 = _mode_index(table, (0, 0, 0))
        val = table.dense_beta(np.array([i0]), np.array([i0]))[0, 0]
        # half-sphere area 2 pi times phi3(0) = R^2 times psi3(0) = pi R^2
        ref = kern.carleman_constant(3) * 2 * np.pi * g.R**2 * np.pi * g.R**2
        assert val == pytest.approx(ref, rel=1e-3)

    def test_lattice_exact_symmetries(self):
        g = VelocityGrid(3, 8, 8.0)
        table = precompute_beta_fast(g, VhsKernel.hard_spheres_3d(),
                                     m_angles=(8, 8), self_check=False)
        group = [((1, 2, 1), (2, -1, 0)), ((2, 1, 1), (1, -2, 0)),
                 ((-1, -2, 1), (-2, 1, 0))]
        vals = []
        for lv, mv in group:
            il, im = _mode_index(table, lv), _mode_index(table, mv)
            vals.append(table.dense_beta(np.array([il]), np.array([im]))[0, 0])
        assert max(vals) - min(vals) <= 1e-10 * max(abs(v) for v in vals)

    def test_fast_table_requires_constant_carleman_kernel(self):
        with pytest.raises(ValueError):
            precompute_beta_fast(VelocityGrid(3, 8, 8.0), MAXWELL)
        with pytest.raises(ValueError):
            precompute_beta_fast(VelocityGrid(2, 8, 8.0),
                                 VhsKernel.hard_spheres_3d())


class TestTableCache:
    def test_round_trip_and_parameter_invalidation(self, tmp_path, grid8):
        cache = str(tmp_path)
        t1 = precompute_beta_classical(grid8, MAXWELL, n_radial=24,
                                       n_angle=48, cache_dir=cache)
        files = list(tmp_path.iterdir())
        assert len(files) == 1
        t2 = precompute_beta_classical(grid8, MAXWELL, n_radial=24,
                                       n_angle=48, cache_dir=cache)
        assert np.array_equal(t1.beta, t2.beta)
        # different parameters must not hit the same entry
        t3 = precompute_beta_classical(grid8, MAXWELL, n_radial=32,
                                       n_angle=48, cache_dir=cache)
        assert len(list(tmp_path.iterdir())) == 2
        assert not np.array_equal(t1.beta, t3.beta)

    def test_fast_table_cache_round_trip(self, tmp_path, grid8):
        cache = str(tmp_path)
        t1 = precompute_beta_fast(grid8, MAXWELL, m_angles=32,
                                  cache_dir=cache)
        t2 = precompute_beta_fast(grid8, MAXWELL, m_angles=32,
                                  cache_dir=cache)
        assert np.array_equal(t1.gain_a, t2.gain_a)
        assert np.array_equal(t1.diag, t2.diag)

    def test_corrupt_cache_is_rebuilt(self, tmp_path, grid8):
        cache = str(tmp_path)
        precompute_beta_fast(grid8, MAXWELL, m_angles=32, cache_dir=cache)
        path = next(tmp_path.iterdir())
        path.write_bytes(b"garbage")
        t = precompute_beta_fast(grid8, MAXWELL, m_angles=32, cache_dir=cache)
        assert t.gain_a.shape[0] == 32
