import time

import numpy as np
import pytest

from fastboltz.collision import (ClassicalCollision, DenseFastReference,
                                 FastCollision, _PairwiseCollision)
from fastboltz.diagnostics import kinetic_entropy
from fastboltz.kernels import (VhsKernel, precompute_beta_classical,
                               precompute_beta_fast)
from fastboltz.spectral import forward_transform, inverse_transform
from fastboltz.velocity import VelocityGrid, maxwellian, moments

MAXWELL = VhsKernel.maxwell_2d()


def _project(values, grid):
    return inverse_transform(forward_transform(values, grid), grid)


def _conserved(q, grid):
    w = grid.cell_measure
    mass = w * q.sum()
    mom = np.array([w * (q * grid.component(i)).sum() for i in range(2)])
    energy = 0.5 * w * (q * grid.speed_squared()).sum()
    return mass, mom, energy


class TestMaxwellianAnnihilation:
    def test_classical_residual_drops_with_resolution(
            self, classical_table8, classical_table16, grid8, grid16):
        res = []
        for table, grid in ((classical_table8, grid8),
                            (classical_table16, grid16)):
            M = maxwellian(1.0, np.zeros(2), 1.0, grid)
            res.append(np.abs(ClassicalCollision(table, grid)(M)).max())
        assert res[0] / res[1] >= 10.0

    def test_fast_residual_drops_with_resolution(self, fast_table8,
                                                 fast_table16, grid8, grid16):
        res = []
        for table, grid in ((fast_table8, grid8), (fast_table16, grid16)):
            M = maxwellian(1.0, np.zeros(2), 1.0, grid)
            res.append(np.abs(FastCollision(table, grid)(M)).max())
        assert res[0] / res[1] >= 10.0


class TestMassInvariance:
    @pytest.mark.parametrize("path", ["classical", "fast_pad", "fast_wrap"])
    def test_zero_mode_of_output_vanishes(self, path, grid16,
                                          classical_table16, fast_table16):
        rng = np.random.default_rng(42)
        f = rng.uniform(0.1, 1.0, size=grid16.shape)
        op = {"classical": ClassicalCollision(classical_table16, grid16),
              "fast_pad": FastCollision(fast_table16, grid16, "pad"),
              "fast_wrap": FastCollision(fast_table16, grid16, "wrap"),
              }[path]
        q = op(f)
        assert abs(grid16.mass(q)) <= 1e-12 * grid16.mass(f)


class TestGalerkinConsistency:
    def test_three_evaluation_orders_agree(self, fast_table16, grid16):
        # the same decoupled table evaluated (a) with the dense pairwise
        # engine, (b) with the dense reconstruction wrapper, (c) with FFT
        # convolutions: algebraically identical sums
        rng = np.random.default_rng(7)
        f = rng.uniform(0.1, 1.0, size=grid16.shape)
        dense_engine = _PairwiseCollision(grid16, fast_table16.dense_beta(),
                                          fast_table16.diag,
                                          fast_table16.modes, "pad")
        wrapper = DenseFastReference(fast_table16, grid16, "pad")
        fft_path = FastCollision(fast_table16, grid16, "pad")
        qa, qb, qc = dense_engine(f), wrapper(f), fft_path(f)
        scale = np.abs(qa).max()
        assert np.abs(qa - qb).max() <= 1e-12 * scale
        assert np.abs(qa - qc).max() <= 1e-10 * scale

    def test_wrap_semantics_agree(self, fast_table16, grid16):
        rng = np.random.default_rng(8)
        f = rng.uniform(0.1, 1.0, size=grid16.shape)
        qa = DenseFastReference(fast_table16, grid16, "wrap")(f)
        qb = FastCollision(fast_table16, grid16, "wrap")(f)
        assert np.abs(qa - qb).max() <= 1e-10 * np.abs(qa).max()


class TestOracleFixtures:
    """Frozen brute-force-quadrature expectations (see
    tests/fixtures/generate_fixtures.py)."""

    @pytest.fixture(scope="class")
    def fixtures(self):
        import os
        path = os.path.join(os.path.dirname(__file__), "fixtures",
                            "oracle_cases.npz")
        return np.load(path)

    @pytest.mark.parametrize("case", ["bimodal", "anisotropic", "lowband"])
    def test_classical_path_matches_oracle_n16(self, fixtures, case, grid16,
                                               classical_table16):
        f = fixtures[f"f_n16_{case}"]
        ref = fixtures[f"q_classical_n16_{case}"]
        q = ClassicalCollision(classical_table16, grid16)(f)
        assert np.abs(q - ref).max() <= 1e-5 * np.abs(ref).max()

    @pytest.mark.parametrize("case", ["bimodal", "anisotropic", "lowband"])
    def test_fast_path_matches_oracle_n16(self, fixtures, case, grid16,
                                          fast_table16):
        f = fixtures[f"f_n16_{case}"]
        ref = fixtures[f"q_carleman_n16_{case}"]
        q = FastCollision(fast_table16, grid16, "pad")(f)
        assert np.abs(q - ref).max() <= 1e-4 * np.abs(ref).max()


class TestMomentDefects:
    def test_momentum_energy_defects_decay_with_resolution(self):
        # the collision output should lose momentum/energy only at spectral
        # tolerance, improving monotonically with n on a fixed smooth state
        defects = []
        for n in (8, 16, 32):
            grid = VelocityGrid(2, n, 8.0)
            table = precompute_beta_classical(grid, MAXWELL, n_radial=48,
                                              n_angle=96)
            f = 0.5 * (maxwellian(1.0, np.array([0.8, 0.4]), 1.0, grid)
                       + maxwellian(1.0, np.array([-0.8, -0.4]), 1.0, grid))
            q = ClassicalCollision(table, grid)(f)
            _, mom, energy = _conserved(q, grid)
            defects.append(np.abs(mom).max() + abs(energy))
        assert defects[0] > defects[1] > defects[2]


class TestRelaxation:
    def test_entropy_non_increasing_short_run(self, classical_table32,
                                              grid32):
        op = ClassicalCollision(classical_table32, grid32)
        f = 0.5 * (maxwellian(1.0, np.array([1.0, 0.5]), 1.0, grid32)
                   + maxwellian(1.0, np.array([-1.0, -0.5]), 1.0, grid32))
        dt = 0.05
        h_prev = kinetic_entropy(f, grid32)
        for _ in range(50):
            f = f + dt * op(f)
            h = kinetic_entropy(f, grid32)
            assert h <= h_prev + 1e-6
            h_prev = h


@pytest.mark.perf
class TestScaling:
    def test_fast_path_grows_slower_than_classical(self):
        # order-of-growth only: doubling n should cost the dense pairwise
        # path markedly more than the FFT path
        times = {}
        for n in (16, 32):
            grid = VelocityGrid(2, n, 8.0)
            f = maxwellian(1.0, np.zeros(2), 1.0, grid)
            ct = precompute_beta_classical(grid, MAXWELL, n_radial=24,
                                           n_angle=48, self_check=False)
            ft = precompute_beta_fast(grid, MAXWELL, m_angles=2 * n,
                                      self_check=False)
            for name, op in (("classical", ClassicalCollision(ct, grid)),
                             ("fast", FastCollision(ft, grid, "pad"))):
                op(f)
                reps = 5 if n == 32 else 20
                t0 = time.perf_counter()
                for _ in range(reps):
                    op(f)
                times[name, n] = (time.perf_counter() - t0) / reps
        classical_ratio = times["classical", 32] / times["classical", 16]
        fast_ratio = times["fast", 32] / times["fast", 16]
        assert classical_ratio > 1.5 * fast_ratio
