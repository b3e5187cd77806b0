"""Brute-force quadrature of the truncated, periodized collision operator.

This module is the ground truth for both spectral collision paths.  It
shares none of their machinery: the integrals are evaluated directly in
velocity space by tensor quadrature (Gauss-Legendre radial, uniform
angular), and the periodized distribution is evaluated from its own
direct DFT of the nodal data.  Feasible for small grids only.

Two truncation geometries are supported, mirroring the two spectral
paths:

* "classical": relative velocity in the ball of radius R times the unit
  sphere of scattering directions;
* "carleman": orthogonal shift pairs (y, z), each in the ball of radius
  R, the delta constraint resolved by the polar parametrization
  y = rho e(theta), z = t e_perp(theta).
"""

from __future__ import annotations

import numpy as np

from .errors import OracleCapError
from .kernels import VhsKernel
from .velocity import VelocityGrid

ORACLE_CAP = 16
_SHIFT_CHUNK = 2048


def _band_range(grid: VelocityGrid) -> np.ndarray:
    N = grid.n // 2 - 1
    return np.arange(-N, N + 1)


def nodal_band_coefficients(values: np.ndarray, grid: VelocityGrid) -> np.ndarray:
    """Direct DFT of nodal data onto the retained modes, as a dense cube
    indexed k in [-N, N] per axis (natural order, not FFT layout)."""
    if values.shape != grid.shape:
        raise ValueError(f"expected shape {grid.shape}, got {values.shape}")
    k = _band_range(grid)
    phase = np.exp(-1j * np.pi * np.outer(k, grid.axis) / grid.L)  # (K, n)
    out = values.astype(complex)
    for _ in range(grid.d):
        # contract the leading nodal axis, cycling axes so each gets done once
        out = np.tensordot(phase, out, axes=(1, 0))
        out = np.moveaxis(out, 0, grid.d - 1)
    return out / grid.size


def fine_axis(grid: VelocityGrid, ne: int) -> np.ndarray:
    return -grid.L + (np.arange(ne) + 0.5) * (2.0 * grid.L / ne)


def eval_shifted(cube: np.ndarray, grid: VelocityGrid, ne: int,
                 shifts: np.ndarray) -> np.ndarray:
    """Evaluate the periodized interpolant on the ne-lattice displaced by
    each shift vector: returns (n_shifts, ne, ..., ne) real values."""
    if grid.d != 2:
        raise OracleCapError("direct oracle evaluation is implemented for d = 2")
    k = _band_range(grid)
    x = fine_axis(grid, ne)
    E = np.exp(1j * np.pi * np.outer(k, x) / grid.L)            # (K, ne)
    shifts = np.atleast_2d(shifts)
    out = np.empty((shifts.shape[0], ne, ne))
    for start in range(0, shifts.shape[0], _SHIFT_CHUNK):
        stop = min(shifts.shape[0], start + _SHIFT_CHUNK)
        w = shifts[start:stop]
        P0 = np.exp(1j * np.pi * np.outer(w[:, 0], k) / grid.L)  # (S, K)
        P1 = np.exp(1j * np.pi * np.outer(w[:, 1], k) / grid.L)
        CP = cube[None, :, :] * P0[:, :, None] * P1[:, None, :]  # (S, K, K)
        tmp = np.swapaxes(CP @ E, 1, 2)                          # (S, ne1, K0)
        out[start:stop] = np.real(np.swapaxes(tmp @ E, 1, 2))    # (S, ne0, ne1)
    return out


def _gl(n: int, a: float, b: float):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def _classical_quadrature(cube, grid, kernel: VhsKernel, R, ne,
                          n_radial, n_angle):
    r, wr = _gl(n_radial, 0.0, R)
    ang = 2.0 * np.pi * (np.arange(n_angle) + 0.5) / n_angle
    e = np.stack([np.cos(ang), np.sin(ang)], axis=-1)           # (A, 2)
    base = eval_shifted(cube, grid, ne, np.zeros((1, 2)))[0]
    Q = np.zeros((ne, ne))
    for ri, wi in zip(r, wr):
        kern_w = wi * kernel.c_gamma * ri ** (kernel.gamma + 1.0)
        u = ri * e                                              # (A, 2)
        f_star = eval_shifted(cube, grid, ne, u)                # (A, ne, ne)
        # gain: both post-collisional shifts for every (u, sigma) pair
        s_plus = (-0.5 * u[:, None, :] + 0.5 * ri * e[None, :, :]).reshape(-1, 2)
        s_minus = (-0.5 * u[:, None, :] - 0.5 * ri * e[None, :, :]).reshape(-1, 2)
        f_p = eval_shifted(cube, grid, ne, s_plus)
        f_m = eval_shifted(cube, grid, ne, s_minus)
        gain = (f_p * f_m).reshape(n_angle, n_angle, ne, ne).sum(axis=(0, 1))
        gain *= (2.0 * np.pi / n_angle) ** 2
        loss = (2.0 * np.pi) * (2.0 * np.pi / n_angle) * base * f_star.sum(axis=0)
        Q += kern_w * (gain - loss)
    return Q


def _carleman_quadrature(cube, grid, kernel: VhsKernel, R, ne,
                         n_radial, n_angle):
    bf = kernel.carleman_constant(grid.d)
    rho, wrho = _gl(n_radial, -R, R)
    ang = np.pi * (np.arange(n_angle) + 0.5) / n_angle
    base = eval_shifted(cube, grid, ne, np.zeros((1, 2)))[0]
    Q = np.zeros((ne, ne))
    w_theta = np.pi / n_angle
    for th in ang:
        e = np.array([np.cos(th), np.sin(th)])
        ep = np.array([-np.sin(th), np.cos(th)])
        f_e = eval_shifted(cube, grid, ne, rho[:, None] * e)     # (Nr, ne, ne)
        f_p = eval_shifted(cube, grid, ne, rho[:, None] * ep)
        gain = (np.tensordot(wrho, f_e, axes=(0, 0))
                * np.tensordot(wrho, f_p, axes=(0, 0)))
        pair = (rho[:, None, None] * e + rho[None, :, None] * ep).reshape(-1, 2)
        f_pair = eval_shifted(cube, grid, ne, pair).reshape(
            n_radial, n_radial, ne, ne)
        loss = base * np.einsum("i,j,ijxy->xy", wrho, wrho, f_pair)
        Q += w_theta * bf * (gain - loss)
    return Q


def project_to_grid(values_fine: np.ndarray, grid: VelocityGrid) -> np.ndarray:
    """Retained-band part of a fine-lattice field, evaluated back on the
    solver lattice (independent direct DFT both ways)."""
    ne = values_fine.shape[0]
    if values_fine.shape != (ne,) * grid.d:
        raise ValueError("fine field must be square")
    if ne <= 3 * (grid.n // 2 - 1):
        raise ValueError(f"fine lattice ne = {ne} too coarse to separate the "
                         f"band of n = {grid.n} (need ne > 3N)")
    k = _band_range(grid)
    x = fine_axis(grid, ne)
    phase = np.exp(-1j * np.pi * np.outer(k, x) / grid.L)
    cube = values_fine.astype(complex)
    for _ in range(grid.d):
        cube = np.tensordot(phase, cube, axes=(1, 0))
        cube = np.moveaxis(cube, 0, grid.d - 1)
    cube /= ne**grid.d
    E = np.exp(1j * np.pi * np.outer(k, grid.axis) / grid.L)
    out = cube
    for _ in range(grid.d):
        out = np.tensordot(E.T, out, axes=(1, 0))
        out = np.moveaxis(out, 0, grid.d - 1)
    return np.real(out)


def collide_oracle(values: np.ndarray, grid: VelocityGrid, kernel: VhsKernel,
                   rep: str = "classical", R: float | None = None,
                   n_radial: int = 32, n_angle: int = 64,
                   refine: int = 2, project: bool = True) -> np.ndarray:
    """Direct quadrature of the truncated collision operator.

    The operator is evaluated pointwise on a refine*n lattice (the result
    has trigonometric degree twice the input band, which the finer lattice
    resolves without aliasing) and, by default, projected back onto the
    retained band at the solver nodes for comparison against the spectral
    paths.  Refuses grids above the practicality cap.
    """
    if grid.n > ORACLE_CAP:
        raise OracleCapError(
            f"oracle capped at n <= {ORACLE_CAP}, got n = {grid.n}")
    if rep not in ("classical", "carleman"):
        raise ValueError(f"unknown representation {rep!r}")
    R = grid.R if R is None else R
    ne = refine * grid.n
    cube = nodal_band_coefficients(values, grid)
    if rep == "classical":
        fine = _classical_quadrature(cube, grid, kernel, R, ne,
                                     n_radial, n_angle)
    else:
        fine = _carleman_quadrature(cube, grid, kernel, R, ne,
                                    n_radial, n_angle)
    if not project:
        return fine
    return project_to_grid(fine, grid)


def fine_lattice_mass(values_fine: np.ndarray, grid: VelocityGrid) -> float:
    """Midpoint-quadrature mass of a fine-lattice field."""
    ne = values_fine.shape[0]
    return float((2.0 * grid.L / ne) ** grid.d * values_fine.sum())
