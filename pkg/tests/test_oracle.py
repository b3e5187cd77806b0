import os

import numpy as np
import pytest

from fastboltz.collision import ClassicalCollision, FastCollision
from fastboltz.errors import OracleCapError
from fastboltz.kernels import VhsKernel
from fastboltz.oracle import (collide_oracle, eval_shifted, fine_lattice_mass,
                              nodal_band_coefficients, project_to_grid)
from fastboltz.spectral import forward_transform, inverse_transform
from fastboltz.velocity import VelocityGrid, maxwellian

MAXWELL = VhsKernel.maxwell_2d()

FIXTURES = np.load(os.path.join(os.path.dirname(__file__), "fixtures",
                                "oracle_cases.npz"))


def _project(values, grid):
    return inverse_transform(forward_transform(values, grid), grid)


def test_interpolant_evaluation_reproduces_nodal_data(grid8):
    rng = np.random.default_rng(0)
    f = _project(rng.uniform(0.1, 1.0, size=grid8.shape), grid8)
    cube = nodal_band_coefficients(f, grid8)
    ev = eval_shifted(cube, grid8, grid8.n, np.zeros((1, 2)))[0]
    assert np.abs(ev - f).max() <= 1e-13


def test_shift_by_full_period_is_identity(grid8):
    rng = np.random.default_rng(1)
    f = _project(rng.uniform(0.1, 1.0, size=grid8.shape), grid8)
    cube = nodal_band_coefficients(f, grid8)
    ev = eval_shifted(cube, grid8, grid8.n,
                      np.array([[2 * grid8.L, 0.0]]))[0]
    assert np.abs(ev - f).max() <= 1e-12


def test_weak_form_mass_vanishes(grid8):
    rng = np.random.default_rng(2)
    f = _project(rng.uniform(0.1, 1.0, size=grid8.shape), grid8)
    fine = collide_oracle(f, grid8, MAXWELL, rep="classical", project=False,
                          n_radial=24, n_angle=48)
    assert abs(fine_lattice_mass(fine, grid8)) <= 1e-9 * grid8.mass(f)


def test_maxwellian_nearly_annihilated(grid8):
    M = maxwellian(1.0, np.zeros(2), 1.0, grid8)
    q = collide_oracle(M, grid8, MAXWELL, rep="classical",
                       n_radial=24, n_angle=48)
    # residual is the band-projection error of the n = 8 grid, not the
    # quadrature; it is small relative to the collision scale of an O(1)
    # non-equilibrium state (~1e-2)
    assert np.abs(q).max() <= 5e-3


def test_regression_fixture_reproduces(grid8):
    f = FIXTURES["f_regression_n8"]
    ref = FIXTURES["q_regression_n8"]
    q = collide_oracle(f, grid8, MAXWELL, rep="classical",
                       n_radial=40, n_angle=80)
    assert np.abs(q - ref).max() <= 1e-10 * np.abs(ref).max()


def test_live_oracle_matches_classical_path(grid8, classical_table8):
    rng = np.random.default_rng(5)
    f = _project(rng.uniform(0.2, 1.0, size=grid8.shape), grid8)
    q_path = ClassicalCollision(classical_table8, grid8)(f)
    q_oracle = collide_oracle(f, grid8, MAXWELL, rep="classical",
                              n_radial=32, n_angle=64)
    assert np.abs(q_path - q_oracle).max() <= 1e-5 * np.abs(q_oracle).max()


def test_live_oracle_matches_fast_path(grid8, fast_table8):
    rng = np.random.default_rng(6)
    f = _project(rng.uniform(0.2, 1.0, size=grid8.shape), grid8)
    q_path = FastCollision(fast_table8, grid8, "pad")(f)
    q_oracle = collide_oracle(f, grid8, MAXWELL, rep="carleman",
                              n_radial=48, n_angle=64)
    assert np.abs(q_path - q_oracle).max() <= 1e-4 * np.abs(q_oracle).max()


def test_oracle_refuses_large_grids():
    g = VelocityGrid(2, 32, 8.0)
    with pytest.raises(OracleCapError):
        collide_oracle(np.ones(g.shape), g, MAXWELL)


def test_projection_requires_adequate_fine_lattice(grid8):
    with pytest.raises(ValueError):
        project_to_grid(np.ones((8, 8)), grid8)
