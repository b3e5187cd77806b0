"""Velocity-space discretization, moments, and Maxwellian construction.

The velocity domain is the box [-L, L]^d sampled on a uniform cell-centered
lattice, so every node maps to a node under sign flips of any component.
Distribution values live on this lattice; moment extraction is a plain
midpoint quadrature with the fixed summation order of numpy reductions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateStateError

DEFAULT_RHO_FLOOR = 1e-12


@dataclass(frozen=True)
class VelocityGrid:
    """Uniform symmetric lattice on [-L, L]^d with truncation radius R.

    Nodes per axis sit at v_j = -L + (j + 1/2) * dv with dv = 2L/n, which is
    symmetric under v -> -v component-wise.  n must be even so the lattice
    contains no zero node and reflections are exact permutations.

    R truncates the collision integrals.  The default follows the minimal
    anti-aliasing prescription for distributions supported in the ball of
    radius S = 2L/(3 + sqrt 2): R = 2S, so that one collision step never
    couples different periodic images.  Larger radii (up to sqrt(2) L,
    which covers the whole torus) admit wrapped collision pairs whose
    contribution grows with the tail mass of the state.
    """

    d: int
    n: int
    L: float
    R: float | None = None

    def __post_init__(self):
        if self.d not in (2, 3):
            raise ValueError(f"velocity dimension must be 2 or 3, got {self.d}")
        if self.n <= 0 or self.n % 2 != 0:
            raise ValueError(f"nodes per axis must be positive and even, got {self.n}")
        if self.L <= 0:
            raise ValueError(f"half-width L must be positive, got {self.L}")
        if self.R is None:
            object.__setattr__(self, "R", 4.0 * self.L / (3.0 + math.sqrt(2.0)))
        if self.R <= 0:
            raise ValueError(f"truncation radius R must be positive, got {self.R}")

    @property
    def dv(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def size(self) -> int:
        return self.n**self.d

    @property
    def cell_measure(self) -> float:
        return self.dv**self.d

    @property
    def axis(self) -> np.ndarray:
        """Node coordinates along one axis."""
        return -self.L + (np.arange(self.n) + 0.5) * self.dv

    def component(self, i: int) -> np.ndarray:
        """Coordinate of velocity component i, broadcastable over the lattice."""
        shape = [1] * self.d
        shape[i] = self.n
        return self.axis.reshape(shape)

    def nodes(self) -> np.ndarray:
        """All lattice nodes, shape (*self.shape, d)."""
        grids = np.meshgrid(*([self.axis] * self.d), indexing="ij")
        return np.stack(grids, axis=-1)

    def speed_squared(self) -> np.ndarray:
        out = np.zeros(self.shape)
        for i in range(self.d):
            out = out + self.component(i) ** 2
        return out

    def mass(self, values: np.ndarray) -> np.ndarray:
        """Discrete mass dv^d * sum(f), reduced over the trailing velocity axes."""
        return self.cell_measure * values.sum(axis=tuple(range(-self.d, 0)))


@dataclass
class Moments:
    """Macroscopic fields of a distribution: density, velocity, temperature,
    pressure (k_B = 1) and heat flux.  Entries carry any leading batch axes
    of the distribution they were extracted from."""

    rho: np.ndarray
    u: np.ndarray
    T: np.ndarray
    p: np.ndarray
    q: np.ndarray


@dataclass
class EntropyTriple:
    """Entropy relative to the global Maxwellian (Hg), to the local Maxwellian
    (Hl), and the hydrodynamic remainder (Hh)."""

    Hg: float
    Hl: float
    Hh: float


def moments(values: np.ndarray, grid: VelocityGrid,
            rho_floor: float = DEFAULT_RHO_FLOOR) -> Moments:
    """Extract (rho, u, T, p, q) from nodal values by midpoint quadrature.

    `values` may carry leading batch axes (spatial cells); the trailing
    grid.d axes are reduced.  Raises DegenerateStateError if any density
    falls at or below `rho_floor`.
    """
    vaxes = tuple(range(-grid.d, 0))
    w = grid.cell_measure
    rho = w * values.sum(axis=vaxes)
    if np.any(rho <= rho_floor) or not np.all(np.isfinite(rho)):
        raise DegenerateStateError(
            f"density at or below floor {rho_floor}: min rho = {np.min(rho)}")

    u = np.empty(rho.shape + (grid.d,))
    for i in range(grid.d):
        u[..., i] = w * (values * grid.component(i)).sum(axis=vaxes) / rho

    batch = rho.shape
    pec_sq = np.zeros(batch + grid.shape)
    pec = []
    for i in range(grid.d):
        ci = grid.component(i) - u[..., i].reshape(batch + (1,) * grid.d)
        pec.append(ci)
        pec_sq = pec_sq + ci * ci

    T = w * (values * pec_sq).sum(axis=vaxes) / (grid.d * rho)
    q = np.empty_like(u)
    for i in range(grid.d):
        q[..., i] = 0.5 * w * (values * pec[i] * pec_sq).sum(axis=vaxes)
    return Moments(rho=rho, u=u, T=T, p=rho * T, q=q)


def maxwellian(rho, u, T, grid: VelocityGrid) -> np.ndarray:
    """Nodal Maxwellian rho/(2 pi T)^{d/2} * exp(-|v-u|^2 / (2T)), k_B = 1.

    rho and T may carry batch axes; u carries the same batch axes plus a
    trailing component axis of length grid.d.
    """
    rho = np.asarray(rho, dtype=float)
    T = np.asarray(T, dtype=float)
    u = np.asarray(u, dtype=float)
    if np.any(rho <= 0):
        raise ValueError("maxwellian requires rho > 0")
    if np.any(T <= 0):
        raise ValueError("maxwellian requires T > 0")

    batch = rho.shape
    expo = np.zeros(batch + grid.shape)
    for i in range(grid.d):
        ci = grid.component(i) - u[..., i].reshape(batch + (1,) * grid.d)
        expo = expo + ci * ci
    Tb = T.reshape(batch + (1,) * grid.d)
    rb = rho.reshape(batch + (1,) * grid.d)
    return rb / (2.0 * np.pi * Tb) ** (grid.d / 2.0) * np.exp(-expo / (2.0 * Tb))


def maxwellian_from(m: Moments, grid: VelocityGrid) -> np.ndarray:
    return maxwellian(m.rho, m.u, m.T, grid)
