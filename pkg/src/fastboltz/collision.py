"""Spectral evaluation of the truncated collision operator.

Two evaluation strategies share the projected-sum semantics
Q_hat[k] = sum_{l+m=k} (beta[l,m] - beta[m,m]) fhat[l] fhat[m]:

* pairwise summation against a dense kernel table, O(n_modes^2) per cell;
* angle-decoupled evaluation against a fast table, a handful of FFT
  convolutions per angle, O(M n^d log n) per cell.

Mode sums outside the retained band are dropped ("pad" dealiasing, exact
Galerkin projection) or wrapped circularly ("wrap", the cheaper classical
practice where the velocity-domain margin keeps wrapped content at the
level of the distribution tails; the mass mode is re-zeroed exactly).
Operators are immutable after construction and safe to share across
threads; every call works on caller-provided arrays only.
"""

from __future__ import annotations

import numpy as np
import scipy.fft as sfft

from .kernels import ClassicalKernelTable, FastKernelTable
from .spectral import (band_indices, extract_band, forward_transform,
                       insert_band, inverse_transform, mode_numbers)
from .velocity import VelocityGrid

_MAX_CHUNK_BYTES = 1 << 27
_FFT_WORKERS = -1  # scipy.fft: all cores; batches split per transform, so
                   # results are bit-identical for any worker count


def _wrap_modes(k: np.ndarray, n: int) -> np.ndarray:
    """Wrap integer modes into the FFT range [-n/2, n/2 - 1]."""
    half = n // 2
    return (k + half) % n - half


class _PairwiseCollision:
    """Shared pairwise-sum engine over a dense kernel-mode table."""

    def __init__(self, grid: VelocityGrid, beta: np.ndarray, diag: np.ndarray,
                 modes: np.ndarray, dealias: str = "pad"):
        if dealias not in ("pad", "wrap"):
            raise ValueError(f"dealias must be 'pad' or 'wrap', got {dealias}")
        self.grid = grid
        self.dealias = dealias
        nb = modes.shape[0]
        if beta.shape != (nb, nb):
            raise ValueError(
                f"kernel table shape {beta.shape} does not match {nb} modes")
        N = grid.n // 2 - 1

        raw = modes[:, None, :] + modes[None, :, :]
        if dealias == "wrap":
            ksum = _wrap_modes(raw, grid.n)
            # on the cell-centered lattice a mode shifted by n flips sign:
            # exp(i pi n v_j / L) = (-1)^{n+1} at the nodes
            wraps = np.abs(raw - ksum).sum(axis=-1) // grid.n
            sign = np.float64(-1.0 if (grid.n + 1) % 2 else 1.0) ** wraps
        else:
            ksum = raw
            sign = np.ones(raw.shape[:-1])
        keep = np.all(np.abs(ksum) <= N, axis=-1)
        lidx, midx = np.nonzero(keep)
        tgt_vec = ksum[lidx, midx]
        pair_sign = sign[lidx, midx]

        # band mode -> flat band position lookup
        span = 2 * N + 1
        lookup = np.full((span,) * grid.d, -1, dtype=np.int64)
        pos = tuple(modes[:, a] + N for a in range(grid.d))
        lookup[pos] = np.arange(nb)
        tgt = lookup[tuple(tgt_vec[:, a] + N for a in range(grid.d))]

        self._src_l = lidx.astype(np.int64)
        self._src_m = midx.astype(np.int64)
        self._tgt = tgt
        self._weight = pair_sign * (beta[lidx, midx] - diag[midx])
        self._nb = nb
        self._zero_mode = int(lookup[(N,) * grid.d])

    def coefficients(self, coeffs: np.ndarray) -> np.ndarray:
        """Apply to flat band coefficients (..., n_modes)."""
        lead = coeffs.shape[:-1]
        flat = coeffs.reshape(-1, self._nb)
        out = np.empty_like(flat)
        for i in range(flat.shape[0]):
            g = self._weight * flat[i, self._src_l] * flat[i, self._src_m]
            out[i] = (np.bincount(self._tgt, weights=g.real, minlength=self._nb)
                      + 1j * np.bincount(self._tgt, weights=g.imag,
                                         minlength=self._nb))
        if self.dealias == "wrap":
            out[:, self._zero_mode] = 0.0
        return out.reshape(lead + (self._nb,))

    def __call__(self, values: np.ndarray) -> np.ndarray:
        coeffs = extract_band(forward_transform(values, self.grid), self.grid)
        qc = self.coefficients(coeffs)
        return inverse_transform(insert_band(qc, self.grid), self.grid)


class ClassicalCollision(_PairwiseCollision):
    """Collision operator backed by the dense classical kernel table."""

    def __init__(self, table: ClassicalKernelTable, grid: VelocityGrid,
                 dealias: str = "pad"):
        if table.grid_n != grid.n or table.L != grid.L:
            raise ValueError("kernel table was built for a different grid")
        super().__init__(grid, table.beta, table.diag, table.modes, dealias)
        self.table = table


class DenseFastReference(_PairwiseCollision):
    """Pairwise summation over the dense reconstruction of a fast table.

    Same quadrature as the fast path, different evaluation order; used to
    verify the FFT evaluation to round-off.
    """

    def __init__(self, table: FastKernelTable, grid: VelocityGrid,
                 dealias: str = "pad"):
        beta = table.dense_beta()
        super().__init__(grid, beta, table.diag, table.modes, dealias)
        self.table = table


class FastCollision:
    """Angle-decoupled collision evaluation via FFT convolutions.

    All per-angle work happens in raw FFT space on the work lattice: the
    lattice phase factors are folded into the embedded spectrum once per
    call, so each angle costs one elementwise mask product and its share
    of one batched inverse transform.
    """

    def __init__(self, table: FastKernelTable, grid: VelocityGrid,
                 dealias: str = "pad"):
        if table.grid_n != grid.n or table.L != grid.L:
            raise ValueError("kernel table was built for a different grid")
        if dealias not in ("pad", "wrap"):
            raise ValueError(f"dealias must be 'pad' or 'wrap', got {dealias}")
        self.grid = grid
        self.table = table
        self.dealias = dealias
        self.work = (VelocityGrid(grid.d, 2 * grid.n, grid.L, grid.R)
                     if dealias == "pad" else grid)

        work = self.work
        pos = np.ravel_multi_index(
            tuple(table.modes[:, a] % work.n for a in range(grid.d)),
            work.shape)
        self._pos = pos
        n_ang = table.weight.size
        self._ga = np.zeros((n_ang, work.size))
        self._gb = np.zeros((n_ang, work.size))
        self._ga[:, pos] = table.gain_a * table.weight[:, None]
        self._gb[:, pos] = table.gain_b
        self._ga = self._ga.reshape((n_ang,) + work.shape)
        self._gb = self._gb.reshape((n_ang,) + work.shape)
        self._diag = np.zeros(work.size)
        self._diag[pos] = table.diag
        self._diag = self._diag.reshape(work.shape)

        # work-lattice phases: embed * conj(phase) before the inverse FFT,
        # multiply by phase / work.size after the forward FFT
        k = mode_numbers(work.n)
        axis_phase = np.exp(1j * np.pi * k * (work.n - 1) / work.n)
        self._inv_phase = np.ones(self._pos.shape, dtype=complex)
        for a in range(grid.d):
            self._inv_phase = self._inv_phase * np.conj(
                axis_phase[table.modes[:, a] % work.n])
        # raw ifftn omits the work.size factor of each physical field; the
        # quadratic pipeline then needs size^2 / size = size on the way back
        self._fwd_phase = np.conj(self._inv_phase) * work.size
        self._zero_mode = int(np.nonzero(
            np.all(table.modes == 0, axis=1))[0][0])

    def _embed(self, coeffs: np.ndarray) -> np.ndarray:
        lead = coeffs.shape[:-1]
        F = np.zeros(lead + (self.work.size,), dtype=complex)
        F[..., self._pos] = coeffs * self._inv_phase
        return F.reshape(lead + self.work.shape)

    def __call__(self, values: np.ndarray) -> np.ndarray:
        grid, work = self.grid, self.work
        lead = values.shape[:-grid.d]
        vaxes = tuple(range(-grid.d, 0))
        coeffs = extract_band(forward_transform(values, grid), grid)
        E = self._embed(coeffs)

        f_phys = sfft.ifftn(E, axes=vaxes, workers=_FFT_WORKERS).real
        loss = sfft.ifftn(self._diag * E, axes=vaxes,
                          workers=_FFT_WORKERS).real * f_phys
        acc = -loss

        n_ang = self.table.weight.size
        batch = int(np.prod(lead)) if lead else 1
        chunk = max(1, _MAX_CHUNK_BYTES // (2 * 16 * batch * work.size))
        expand = (slice(None),) + (None,) * len(lead) + (Ellipsis,)
        for start in range(0, n_ang, chunk):
            stop = min(n_ang, start + chunk)
            masks = np.concatenate([self._ga[start:stop], self._gb[start:stop]])
            W = masks[expand] * E[None]
            W = sfft.ifftn(W, axes=vaxes, workers=_FFT_WORKERS,
                           overwrite_x=True).real
            acc += np.einsum("p...,p...->...", W[:stop - start],
                             W[stop - start:])

        Q = sfft.fftn(acc, axes=vaxes, workers=_FFT_WORKERS)
        qc = Q.reshape(lead + (work.size,))[..., self._pos] * self._fwd_phase
        if self.dealias == "wrap":
            # wrapped products deposit spurious mass in the zero mode
            qc[..., self._zero_mode] = 0.0
        return inverse_transform(insert_band(qc, grid), grid)


def collide_classical(values: np.ndarray, table: ClassicalKernelTable,
                      grid: VelocityGrid, dealias: str = "pad") -> np.ndarray:
    return ClassicalCollision(table, grid, dealias)(values)


def collide_fast(values: np.ndarray, table: FastKernelTable,
                 grid: VelocityGrid, dealias: str = "pad") -> np.ndarray:
    return FastCollision(table, grid, dealias)(values)
