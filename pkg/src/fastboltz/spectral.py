"""Discrete Fourier transform pair between lattice values and band-limited
trigonometric coefficients.

Coefficients follow the expansion f(v) = sum_k fhat_k exp(i pi k.v / L) with
k per axis in [-N, N], N = n/2 - 1; the one leftover FFT slot (k = -n/2) is
projected to zero.  Arrays use numpy FFT frequency layout along the trailing
grid.d axes and accept leading batch axes.
"""

from __future__ import annotations

import numpy as np

from .velocity import VelocityGrid


def mode_numbers(n: int) -> np.ndarray:
    """Integer mode numbers in FFT layout: [0..n/2-1, -n/2..-1]."""
    return np.fft.fftfreq(n, d=1.0 / n).astype(int)


def band_mask_1d(n: int) -> np.ndarray:
    """True on retained modes |k| <= n/2 - 1 (drops the lone -n/2 slot)."""
    k = mode_numbers(n)
    return np.abs(k) <= n // 2 - 1


def _forward_phase(grid: VelocityGrid) -> np.ndarray:
    # exp(-i pi k v_j / L) = phase(k) * exp(-2i pi k j / n) on the centered
    # lattice, with phase(k) = exp(i pi k (n-1)/n).
    k = mode_numbers(grid.n)
    return np.exp(1j * np.pi * k * (grid.n - 1) / grid.n)


def _apply_axis_phases(arr: np.ndarray, phase: np.ndarray, d: int,
                       conjugate: bool = False) -> np.ndarray:
    p = np.conj(phase) if conjugate else phase
    out = arr
    for ax in range(-d, 0):
        shape = [1] * arr.ndim
        shape[ax] = arr.shape[ax]
        out = out * p.reshape(shape)
    return out


def _band_project(spec: np.ndarray, grid: VelocityGrid) -> np.ndarray:
    mask = band_mask_1d(grid.n)
    out = spec
    for ax in range(-grid.d, 0):
        shape = [1] * spec.ndim
        shape[ax] = grid.n
        out = out * mask.reshape(shape)
    return out


def forward_transform(values: np.ndarray, grid: VelocityGrid) -> np.ndarray:
    """Nodal values -> band-limited coefficients (FFT layout, complex)."""
    if values.shape[-grid.d:] != grid.shape:
        raise ValueError(
            f"value shape {values.shape} does not end in grid shape {grid.shape}")
    axes = tuple(range(-grid.d, 0))
    spec = np.fft.fftn(values, axes=axes) / grid.size
    spec = _apply_axis_phases(spec, _forward_phase(grid), grid.d)
    return _band_project(spec, grid)


def inverse_transform(spec: np.ndarray, grid: VelocityGrid) -> np.ndarray:
    """Coefficients (FFT layout) -> real nodal values."""
    if spec.shape[-grid.d:] != grid.shape:
        raise ValueError(
            f"spectrum shape {spec.shape} does not end in grid shape {grid.shape}")
    axes = tuple(range(-grid.d, 0))
    work = _apply_axis_phases(spec, _forward_phase(grid), grid.d, conjugate=True)
    return np.fft.ifftn(work, axes=axes).real * grid.size


def band_modes(grid: VelocityGrid) -> np.ndarray:
    """Retained mode vectors, shape (n_modes, d), in a fixed row-major order."""
    k = mode_numbers(grid.n)
    keep = np.nonzero(band_mask_1d(grid.n))[0]
    sel = [k[keep]] * grid.d
    mesh = np.meshgrid(*sel, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def band_indices(grid: VelocityGrid) -> tuple[np.ndarray, ...]:
    """FFT-layout index tuple addressing the retained modes of band_modes()."""
    keep = np.nonzero(band_mask_1d(grid.n))[0]
    mesh = np.meshgrid(*([keep] * grid.d), indexing="ij")
    return tuple(m.ravel() for m in mesh)


def extract_band(spec: np.ndarray, grid: VelocityGrid) -> np.ndarray:
    """Flatten the retained modes of an FFT-layout spectrum to (..., n_modes)."""
    idx = band_indices(grid)
    nb = idx[0].size
    flat = spec.reshape(spec.shape[:-grid.d] + (grid.size,))
    lin = np.ravel_multi_index(idx, grid.shape)
    return flat[..., lin].reshape(spec.shape[:-grid.d] + (nb,))


def insert_band(coeffs: np.ndarray, grid: VelocityGrid) -> np.ndarray:
    """Inverse of extract_band: place flat band coefficients into FFT layout."""
    idx = band_indices(grid)
    lin = np.ravel_multi_index(idx, grid.shape)
    out = np.zeros(coeffs.shape[:-1] + (grid.size,), dtype=complex)
    out[..., lin] = coeffs
    return out.reshape(coeffs.shape[:-1] + grid.shape)
