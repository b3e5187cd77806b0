"""Spatial meshes, wall specifications, and the full phase-space field.

Meshes are uniform Cartesian (1D intervals or 2D rectangles) with
axis-aligned walls; each boundary side carries one wall specification or
is periodic (paired with the opposite side).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .velocity import VelocityGrid

WALL_KINDS = ("periodic", "specular", "diffuse", "maxwell_mix")


@dataclass
class BoundarySpec:
    """Wall interaction: accommodation alpha blends specular reflection
    (alpha = 0) with diffuse re-emission at wall temperature T_w and wall
    velocity u_w (alpha = 1).

    T_w may be a per-face array for walls with a temperature profile.
    """

    kind: str
    alpha: float = 0.0
    T_w: float | np.ndarray = 1.0
    u_w: tuple[float, ...] = (0.0, 0.0)

    def __post_init__(self):
        if self.kind not in WALL_KINDS:
            raise ValueError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "specular":
            self.alpha = 0.0
        elif self.kind == "diffuse":
            self.alpha = 1.0
        elif self.kind == "maxwell_mix":
            if not 0.0 <= self.alpha <= 1.0:
                raise ValueError(f"accommodation must lie in [0, 1], got {self.alpha}")
        if self.kind in ("diffuse", "maxwell_mix") and self.alpha > 0.0:
            if np.any(np.asarray(self.T_w) <= 0.0):
                raise ValueError("diffuse re-emission requires T_w > 0")

    @classmethod
    def periodic(cls) -> "BoundarySpec":
        return cls(kind="periodic")

    @classmethod
    def specular(cls) -> "BoundarySpec":
        return cls(kind="specular")

    @classmethod
    def diffuse(cls, T_w, u_w=(0.0, 0.0)) -> "BoundarySpec":
        return cls(kind="diffuse", alpha=1.0, T_w=T_w, u_w=tuple(u_w))

    @classmethod
    def maxwell_mix(cls, alpha: float, T_w, u_w=(0.0, 0.0)) -> "BoundarySpec":
        return cls(kind="maxwell_mix", alpha=alpha, T_w=T_w, u_w=tuple(u_w))


def _side_names(d_x: int) -> tuple[str, ...]:
    return ("xlo", "xhi") if d_x == 1 else ("xlo", "xhi", "ylo", "yhi")


@dataclass
class SpatialMesh:
    """Uniform Cartesian mesh with per-side boundary specifications.

    extents: ((x0, x1),) or ((x0, x1), (y0, y1)); cells: (nx,) or (nx, ny).
    boundaries maps side name ('xlo', 'xhi', 'ylo', 'yhi') to a
    BoundarySpec; periodic sides must be declared on both ends of an axis.
    """

    extents: tuple
    cells: tuple
    boundaries: dict = field(default_factory=dict)

    def __post_init__(self):
        self.extents = tuple(tuple(float(v) for v in e) for e in self.extents)
        self.cells = tuple(int(c) for c in self.cells)
        if len(self.extents) != len(self.cells):
            raise ValueError("extents and cells must have matching dimension")
        if self.d_x not in (1, 2):
            raise ValueError(f"spatial dimension must be 1 or 2, got {self.d_x}")
        for (lo, hi), nc in zip(self.extents, self.cells):
            if hi <= lo or nc < 1:
                raise ValueError("degenerate mesh extent or cell count")
        for name in _side_names(self.d_x):
            if name not in self.boundaries:
                raise ValueError(f"missing boundary spec for side {name!r}")
        for axis in range(self.d_x):
            lo, hi = self.side_pair(axis)
            if (self.boundaries[lo].kind == "periodic") != \
               (self.boundaries[hi].kind == "periodic"):
                raise ValueError(f"axis {axis}: periodic sides must be paired")

    @property
    def d_x(self) -> int:
        return len(self.cells)

    def side_pair(self, axis: int) -> tuple[str, str]:
        return (("xlo", "xhi"), ("ylo", "yhi"))[axis]

    def dx(self, axis: int) -> float:
        lo, hi = self.extents[axis]
        return (hi - lo) / self.cells[axis]

    @property
    def cell_measure(self) -> float:
        out = 1.0
        for axis in range(self.d_x):
            out *= self.dx(axis)
        return out

    def centers(self, axis: int) -> np.ndarray:
        lo, hi = self.extents[axis]
        return lo + (np.arange(self.cells[axis]) + 0.5) * self.dx(axis)

    def periodic_axis(self, axis: int) -> bool:
        return self.boundaries[self.side_pair(axis)[0]].kind == "periodic"

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.cells))


@dataclass
class DistributionField:
    """Distribution values over every spatial cell: shape cells + grid.shape."""

    mesh: SpatialMesh
    grid: VelocityGrid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        expected = self.mesh.cells + self.grid.shape
        if self.values.shape != expected:
            raise ValueError(
                f"field shape {self.values.shape}, expected {expected}")

    def copy(self) -> "DistributionField":
        return DistributionField(self.mesh, self.grid, self.values.copy(),
                                 self.time)

    def total_mass(self) -> float:
        return float(self.mesh.cell_measure * self.grid.cell_measure
                     * self.values.sum())
