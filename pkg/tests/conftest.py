import numpy as np
import pytest

from fastboltz.kernels import (VhsKernel, precompute_beta_classical,
                               precompute_beta_fast)
from fastboltz.velocity import VelocityGrid

MAXWELL = VhsKernel.maxwell_2d()


@pytest.fixture(scope="session")
def grid8():
    return VelocityGrid(2, 8, 8.0)


@pytest.fixture(scope="session")
def grid16():
    return VelocityGrid(2, 16, 8.0)


@pytest.fixture(scope="session")
def grid32():
    return VelocityGrid(2, 32, 8.0)


@pytest.fixture(scope="session")
def classical_table8(grid8):
    return precompute_beta_classical(grid8, MAXWELL, n_radial=48, n_angle=96)


@pytest.fixture(scope="session")
def classical_table16(grid16):
    return precompute_beta_classical(grid16, MAXWELL, n_radial=48, n_angle=96)


@pytest.fixture(scope="session")
def classical_table32(grid32):
    return precompute_beta_classical(grid32, MAXWELL)


@pytest.fixture(scope="session")
def fast_table8(grid8):
    return precompute_beta_fast(grid8, MAXWELL, m_angles=64)


@pytest.fixture(scope="session")
def fast_table16(grid16):
    return precompute_beta_fast(grid16, MAXWELL, m_angles=64)


@pytest.fixture(scope="session")
def fast_table32(grid32):
    return precompute_beta_fast(grid32, MAXWELL, m_angles=128)
