"""Precomputed kernel-mode tables for the spectral collision operator.

Two table families are provided.  The dense classical table stores the
kernel mode for every retained mode pair and costs O(n_modes^2) to apply.
The decoupled fast table stores per-angle scalar factors whose weighted
products reconstruct the same kind of kernel modes for the orthogonal-pair
(Carleman-type) truncation, enabling an FFT convolution evaluation.

Both constructions are plain quadratures of their defining integrals:
Gauss-Legendre in the radial variable and uniform (trapezoidal) grids in
all angles, with an optional resolution-doubling self check.  Tables are
immutable after construction and can be cached to disk.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import QuadratureError
from .io_container import read_container, write_container
from .spectral import band_modes
from .velocity import VelocityGrid

log = logging.getLogger(__name__)

TABLE_MAGIC = b"FBKTAB"
TABLE_VERSION = 1

CACHE_ENV_VAR = "FASTBOLTZ_CACHE_DIR"


@dataclass(frozen=True)
class VhsKernel:
    """Variable hard spheres kernel B = c_gamma * |u|^gamma.

    gamma = 0 is the Maxwell-molecule case (B constant), gamma = 1 the hard
    spheres case.
    """

    gamma: float
    c_gamma: float

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.c_gamma <= 0:
            raise ValueError("c_gamma must be positive")

    @classmethod
    def maxwell_2d(cls) -> "VhsKernel":
        """Maxwell molecules in 2 velocity dimensions, normalized so the
        angular kernel mass is one."""
        return cls(gamma=0.0, c_gamma=1.0 / (2.0 * math.pi))

    @classmethod
    def hard_spheres_3d(cls) -> "VhsKernel":
        return cls(gamma=1.0, c_gamma=1.0 / (4.0 * math.pi))

    def angular_mass(self, d: int) -> float:
        """Integral of B over the unit sphere at |u| = 1."""
        surface = 2.0 * math.pi if d == 2 else 4.0 * math.pi
        return self.c_gamma * surface

    def carleman_constant(self, d: int) -> float:
        """Constant value of the orthogonal-pair kernel 2^{d-1} B |u|^{-(d-2)}.

        Constant only for Maxwell molecules in 2D and hard spheres in 3D,
        the two cases the decoupled fast table supports.
        """
        if d == 2 and self.gamma == 0.0:
            return 2.0 * self.c_gamma
        if d == 3 and self.gamma == 1.0:
            return 4.0 * self.c_gamma
        raise ValueError(
            "fast path requires Maxwell molecules (d=2) or hard spheres (d=3); "
            f"got d={d}, gamma={self.gamma}")


def _gauss_legendre(n: int, a: float, b: float):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


# ---------------------------------------------------------------------------
# classical dense table


@dataclass
class ClassicalKernelTable:
    """Dense kernel modes beta[l, m] over retained-mode pairs (flat order of
    spectral.band_modes), plus the loss diagonal beta[m, m]."""

    beta: np.ndarray
    diag: np.ndarray
    modes: np.ndarray
    grid_n: int
    L: float
    R: float
    kernel: VhsKernel
    n_radial: int
    n_angle: int
    check_error: float | None = None

    @property
    def n_modes(self) -> int:
        return self.modes.shape[0]


def _classical_angle_sums(r: np.ndarray, kvecs: np.ndarray, L: float,
                          n_angle: int) -> np.ndarray:
    """A(r, k) = (2 pi / M) sum_p cos(pi r (k . e_p) / (2L)) on the uniform
    full-circle angle grid; real because the grid is symmetric under
    e -> -e for even M."""
    ang = 2.0 * np.pi * (np.arange(n_angle) + 0.5) / n_angle
    dirs = np.stack([np.cos(ang), np.sin(ang)], axis=-1)      # (M, 2)
    kdot = kvecs @ dirs.T                                      # (K, M)
    out = np.empty((r.size, kvecs.shape[0]))
    scale = np.pi / (2.0 * L)
    for i, ri in enumerate(r):
        out[i] = (2.0 * np.pi / n_angle) * np.cos(scale * ri * kdot).sum(axis=1)
    return out


def _classical_beta_values(grid_n: int, L: float, R: float, kernel: VhsKernel,
                           n_radial: int, n_angle: int,
                           modes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Assemble beta over all retained pairs by the tensor quadrature."""
    r, wr = _gauss_legendre(n_radial, 0.0, R)
    radial_w = wr * kernel.c_gamma * r ** (kernel.gamma + 1.0)

    # distinct sum/difference vectors live on the doubled integer lattice
    nb = modes.shape[0]
    two_n = int(np.max(np.abs(modes))) if nb else 0
    span = 4 * two_n + 1
    kaxis = np.arange(-2 * two_n, 2 * two_n + 1)
    kx, ky = np.meshgrid(kaxis, kaxis, indexing="ij")
    kvecs = np.stack([kx.ravel(), ky.ravel()], axis=-1)
    A = _classical_angle_sums(r, kvecs, L, n_angle)            # (n_r, span^2)

    def lattice_index(v):
        return (v[..., 0] + 2 * two_n) * span + (v[..., 1] + 2 * two_n)

    beta = np.empty((nb, nb))
    chunk = max(1, 2**22 // max(nb, 1))
    for start in range(0, nb, chunk):
        stop = min(nb, start + chunk)
        lsum = lattice_index(modes[start:stop, None, :] + modes[None, :, :])
        ldif = lattice_index(modes[None, :, :] - modes[start:stop, None, :])
        beta[start:stop] = np.einsum("r,rx,rx->x", radial_w,
                                     A[:, lsum.ravel()], A[:, ldif.ravel()],
                                     optimize=True).reshape(stop - start, nb)
    diag = np.einsum("r,rx,rx->x", radial_w,
                     A[:, lattice_index(2 * modes)],
                     A[:, np.full(nb, lattice_index(np.zeros(2, dtype=int)))])
    return beta, diag


def precompute_beta_classical(grid: VelocityGrid, kernel: VhsKernel,
                              R: float | None = None,
                              n_radial: int = 64, n_angle: int = 128,
                              self_check: bool = True,
                              check_tol: float = 1e-8,
                              check_pairs: int = 12,
                              cache_dir: str | None = None) -> ClassicalKernelTable:
    """Build the dense kernel-mode table for the sphere-parametrized
    truncation (2D only).

    The self check recomputes a sample of mode pairs at doubled radial and
    angular resolution and raises QuadratureError if the relative drift
    exceeds check_tol.
    """
    if grid.d != 2:
        raise ValueError("classical dense table is implemented for d = 2")
    R = grid.R if R is None else R

    key = {"family": "classical", "d": grid.d, "n": grid.n, "L": grid.L,
           "R": R, "gamma": kernel.gamma, "c_gamma": kernel.c_gamma,
           "n_radial": n_radial, "n_angle": n_angle}
    cached = _cache_load(cache_dir, key)
    modes = band_modes(grid)
    if cached is not None:
        meta, arrays = cached
        return ClassicalKernelTable(
            beta=arrays["beta"], diag=arrays["diag"], modes=modes,
            grid_n=grid.n, L=grid.L, R=R, kernel=kernel,
            n_radial=n_radial, n_angle=n_angle,
            check_error=meta.get("check_error"))

    beta, diag = _classical_beta_values(grid.n, grid.L, R, kernel,
                                        n_radial, n_angle, modes)
    check_error = None
    if self_check:
        rng = np.random.default_rng(0)
        nb = modes.shape[0]
        sample = np.unique(np.concatenate([
            [0, nb - 1], rng.integers(0, nb, size=check_pairs)]))
        sub = modes[sample]
        fine_beta, _ = _classical_beta_values(grid.n, grid.L, R, kernel,
                                              2 * n_radial, 2 * n_angle, sub)
        coarse = beta[np.ix_(sample, sample)]
        scale = np.max(np.abs(fine_beta))
        check_error = float(np.max(np.abs(coarse - fine_beta)) / scale)
        if check_error > check_tol:
            raise QuadratureError(
                f"classical kernel quadrature not converged: doubling pass "
                f"moved sampled modes by {check_error:.3e} > {check_tol:.1e}")

    table = ClassicalKernelTable(beta=beta, diag=diag, modes=modes,
                                 grid_n=grid.n, L=grid.L, R=R, kernel=kernel,
                                 n_radial=n_radial, n_angle=n_angle,
                                 check_error=check_error)
    _cache_store(cache_dir, key, {"check_error": check_error},
                 {"beta": beta, "diag": diag})
    return table


# ---------------------------------------------------------------------------
# fast decoupled tables


def phi2_profile(s, R: float, L: float):
    """Line-segment transform int_{-R}^{R} exp(i pi rho s / L) drho
    = 2 R sinc(pi R s / L)."""
    return 2.0 * R * np.sinc(np.asarray(s, dtype=float) * R / L)


def phi3_profile(s, R: float, L: float):
    """Weighted line transform int_{-R}^{R} |rho| exp(i pi rho s / L) drho
    = R^2 (2 Sinc(x) - Sinc^2(x/2)) with x = pi R s / L."""
    x = np.asarray(s, dtype=float) * R / L
    return R**2 * (2.0 * np.sinc(x) - np.sinc(0.5 * x) ** 2)


def psi3_profile(s, R: float, L: float, n_theta: int = 256):
    """Half-circle average int_0^pi phi3(s cos t) dt by the uniform midpoint
    rule (spectrally accurate: the integrand is smooth and pi-periodic)."""
    t = np.pi * (np.arange(n_theta) + 0.5) / n_theta
    s = np.asarray(s, dtype=float)
    vals = phi3_profile(s[..., None] * np.cos(t), R, L)
    return np.pi / n_theta * vals.sum(axis=-1)


@dataclass
class FastKernelTable:
    """Angle-decoupled factors reconstructing the orthogonal-pair kernel
    modes as beta[l, m] = sum_p weight[p] * gain_a[p, l] * gain_b[p, m].

    2D: one angle index over the half circle, gain_a/gain_b are the segment
    transforms along e_p and its perpendicular.  3D: the flat angle index
    runs over an M1 x M2 half-sphere grid; gain_a holds the weighted-line
    factor along e, gain_b the projected half-circle average.
    The orthogonal-pair kernel constant is folded into `weight`.
    """

    d: int
    gain_a: np.ndarray
    gain_b: np.ndarray
    weight: np.ndarray
    diag: np.ndarray
    modes: np.ndarray
    grid_n: int
    L: float
    R: float
    kernel: VhsKernel
    m_angles: tuple[int, ...]
    check_error: float | None = None

    @property
    def n_modes(self) -> int:
        return self.modes.shape[0]

    def dense_beta(self, rows: np.ndarray | None = None,
                   cols: np.ndarray | None = None) -> np.ndarray:
        """Reconstruct dense kernel modes for the given mode-index subsets."""
        ga = self.gain_a if rows is None else self.gain_a[:, rows]
        gb = self.gain_b if cols is None else self.gain_b[:, cols]
        return np.einsum("p,pl,pm->lm", self.weight, ga, gb, optimize=True)


def _fast_factors_2d(modes: np.ndarray, L: float, R: float, m_angles: int):
    theta = np.pi * (np.arange(m_angles) + 0.5) / m_angles
    e = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    eperp = np.stack([-np.sin(theta), np.cos(theta)], axis=-1)
    ga = phi2_profile(e @ modes.T, R, L)        # (M, n_modes)
    gb = phi2_profile(eperp @ modes.T, R, L)
    return ga, gb


def _fast_factors_3d(modes: np.ndarray, L: float, R: float,
                     m1: int, m2: int, n_psi: int):
    theta = np.pi * (np.arange(m1) + 0.5) / m1
    phi = np.pi * (np.arange(m2) + 0.5) / m2
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    e = np.stack([np.sin(tt) * np.cos(pp),
                  np.sin(tt) * np.sin(pp),
                  np.cos(tt)], axis=-1).reshape(-1, 3)     # (m1*m2, 3)
    sin_t = np.sin(tt).ravel()
    ldot = e @ modes.T                                      # (m1*m2, n_modes)
    ga = phi3_profile(ldot, R, L)
    proj = np.sqrt(np.maximum((modes**2).sum(axis=1)[None, :] - ldot**2, 0.0))
    gb = np.empty_like(ga)
    chunk = max(1, 2**22 // max(modes.shape[0], 1))
    for start in range(0, e.shape[0], chunk):
        stop = min(e.shape[0], start + chunk)
        gb[start:stop] = psi3_profile(proj[start:stop], R, L, n_theta=n_psi)
    return ga, gb, sin_t


def _fast_reference_beta(modes_l: np.ndarray, modes_m: np.ndarray, d: int,
                         L: float, R: float, bf: float, m_ref: int,
                         n_psi: int = 512) -> np.ndarray:
    """High-angle-count reconstruction used by the self check."""
    if d == 2:
        ga, gb = _fast_factors_2d(np.vstack([modes_l, modes_m]), L, R, m_ref)
        w = np.full(m_ref, np.pi / m_ref * bf)
    else:
        ga, gb, sin_t = _fast_factors_3d(np.vstack([modes_l, modes_m]), L, R,
                                         m_ref, m_ref, n_psi)
        w = np.pi**2 / (m_ref * m_ref) * bf * sin_t
    nl = modes_l.shape[0]
    return np.einsum("p,pl,pm->lm", w, ga[:, :nl], gb[:, nl:], optimize=True)


def precompute_beta_fast(grid: VelocityGrid, kernel: VhsKernel,
                         R: float | None = None,
                         m_angles: int | tuple[int, int] = 64,
                         n_psi: int = 256,
                         self_check: bool = True,
                         check_tol: float | None = None,
                         cache_dir: str | None = None) -> FastKernelTable:
    """Build the decoupled fast table (2D Maxwell molecules or 3D hard
    spheres).

    For d = 3, m_angles may be a (M1, M2) pair for the polar/azimuthal
    grids.  When check_tol is given, a dense reconstruction at four times
    the angle count is compared on sampled mode pairs and QuadratureError
    is raised beyond the tolerance; otherwise the drift is only recorded
    in table.check_error (the coarse-table error is dominated by the
    highest modes, which carry negligible spectral content in practice).
    """
    R = grid.R if R is None else R
    bf = kernel.carleman_constant(grid.d)
    if grid.d == 2:
        m_tuple = (int(m_angles),) if np.isscalar(m_angles) else tuple(m_angles)
        if len(m_tuple) != 1:
            raise ValueError("2D fast table takes a single angle count")
    else:
        m_tuple = ((int(m_angles), int(m_angles)) if np.isscalar(m_angles)
                   else tuple(int(m) for m in m_angles))
        if len(m_tuple) != 2:
            raise ValueError("3D fast table takes (M1, M2) angle counts")

    key = {"family": "fast", "d": grid.d, "n": grid.n, "L": grid.L, "R": R,
           "gamma": kernel.gamma, "c_gamma": kernel.c_gamma,
           "m_angles": list(m_tuple), "n_psi": n_psi}
    modes = band_modes(grid)
    cached = _cache_load(cache_dir, key)
    if cached is not None:
        meta, arrays = cached
        return FastKernelTable(
            d=grid.d, gain_a=arrays["gain_a"], gain_b=arrays["gain_b"],
            weight=arrays["weight"], diag=arrays["diag"], modes=modes,
            grid_n=grid.n, L=grid.L, R=R, kernel=kernel, m_angles=m_tuple,
            check_error=meta.get("check_error"))

    if grid.d == 2:
        ga, gb = _fast_factors_2d(modes, grid.L, R, m_tuple[0])
        weight = np.full(m_tuple[0], np.pi / m_tuple[0] * bf)
    else:
        ga, gb, sin_t = _fast_factors_3d(modes, grid.L, R,
                                         m_tuple[0], m_tuple[1], n_psi)
        weight = np.pi**2 / (m_tuple[0] * m_tuple[1]) * bf * sin_t

    diag = np.einsum("p,pl,pl->l", weight, ga, gb)
    table = FastKernelTable(d=grid.d, gain_a=ga, gain_b=gb, weight=weight,
                            diag=diag, modes=modes, grid_n=grid.n, L=grid.L,
                            R=R, kernel=kernel, m_angles=m_tuple)

    if self_check:
        rng = np.random.default_rng(1)
        nb = modes.shape[0]
        sample = np.unique(np.concatenate([
            [0, nb // 2, nb - 1], rng.integers(0, nb, size=9)]))
        sub = modes[sample]
        ref = _fast_reference_beta(sub, sub, grid.d, grid.L, R, bf,
                                   m_ref=4 * max(m_tuple))
        coarse = table.dense_beta(rows=sample, cols=sample)
        scale = np.max(np.abs(ref))
        err = float(np.max(np.abs(coarse - ref)) / scale)
        table.check_error = err
        if check_tol is not None and err > check_tol:
            raise QuadratureError(
                f"fast kernel angle grid too coarse: sampled modes off by "
                f"{err:.3e} > {check_tol:.1e}; increase m_angles")
        if check_tol is None and err > 1e-3:
            log.warning("fast kernel table angle drift %.3e at m_angles=%s "
                        "(high modes under-resolved)", err, m_tuple)

    _cache_store(cache_dir, key, {"check_error": table.check_error},
                 {"gain_a": ga, "gain_b": gb, "weight": weight, "diag": diag})
    return table


# ---------------------------------------------------------------------------
# disk cache


def default_cache_dir() -> str | None:
    return os.environ.get(CACHE_ENV_VAR)


def _cache_path(cache_dir: str, key: dict) -> str:
    digest = hashlib.sha256(
        json.dumps(key, sort_keys=True).encode("utf-8")).hexdigest()[:24]
    return os.path.join(cache_dir, f"kernel-{digest}.fbk")


def _cache_load(cache_dir: str | None, key: dict):
    cache_dir = cache_dir if cache_dir is not None else default_cache_dir()
    if not cache_dir:
        return None
    path = _cache_path(cache_dir, key)
    if not os.path.exists(path):
        return None
    try:
        meta, arrays = read_container(path, TABLE_MAGIC, TABLE_VERSION)
    except Exception as exc:
        log.warning("ignoring unreadable kernel cache %s: %s", path, exc)
        return None
    if meta.get("key") != key:
        log.info("kernel cache %s parameter mismatch; rebuilding", path)
        return None
    return meta, arrays


def _cache_store(cache_dir: str | None, key: dict, extra_meta: dict,
                 arrays: dict[str, np.ndarray]) -> None:
    cache_dir = cache_dir if cache_dir is not None else default_cache_dir()
    if not cache_dir:
        return
    meta = {"key": key}
    meta.update(extra_meta)
    write_container(_cache_path(cache_dir, key), TABLE_MAGIC, TABLE_VERSION,
                    meta, arrays)
