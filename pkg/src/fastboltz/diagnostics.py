"""Entropy functionals and conservation audits over phase-space fields."""

from __future__ import annotations

import numpy as np

from .mesh import DistributionField
from .velocity import (EntropyTriple, VelocityGrid, maxwellian, moments)

ENTROPY_FLOOR = 1e-30


def kinetic_entropy(values: np.ndarray, grid: VelocityGrid,
                    floor: float = ENTROPY_FLOOR) -> float:
    """Clamped entropy dv^d * sum f log f (spectral output can dip slightly
    negative, so the logarithm is evaluated on max(f, floor))."""
    safe = np.maximum(values, floor)
    return float(grid.cell_measure * (values * np.log(safe)).sum())


def conserved_totals(field: DistributionField):
    """Total mass, momentum vector, and kinetic energy of the field."""
    g, mesh = field.grid, field.mesh
    w = mesh.cell_measure * g.cell_measure
    vaxes = tuple(range(-g.d, 0))
    mass = w * field.values.sum()
    mom = np.array([w * (field.values * g.component(i)).sum()
                    for i in range(g.d)])
    energy = 0.5 * w * (field.values * g.speed_squared()).sum()
    return float(mass), mom, float(energy)


def global_maxwellian_moments(field: DistributionField):
    """(rho_g, u_g, T_g) of the volume-averaged equilibrium sharing the
    field's total mass, momentum, and energy."""
    mass, mom, energy = conserved_totals(field)
    volume = 1.0
    for axis in range(field.mesh.d_x):
        lo, hi = field.mesh.extents[axis]
        volume *= hi - lo
    rho_g = mass / volume
    u_g = mom / mass
    d = field.grid.d
    T_g = (2.0 * energy - mass * (u_g**2).sum()) / (d * mass)
    return rho_g, u_g, T_g


def entropies(field: DistributionField,
              floor: float = ENTROPY_FLOOR) -> EntropyTriple:
    """Relative entropies of the field: against the global Maxwellian (Hg),
    against the cell-local Maxwellians (Hl), and the hydrodynamic part
    Hh = sum_i m_i rho_i log(rho_i / T_i^{d/2}).

    The additivity Hg = Hl + Hh holds when the state is normalized to unit
    volume-averaged density and temperature (the caller's responsibility).
    """
    g, mesh = field.grid, field.mesh
    m = moments(field.values, g)
    rho_g, u_g, T_g = global_maxwellian_moments(field)
    if rho_g <= 0 or T_g <= 0:
        raise ValueError("global Maxwellian undefined: nonpositive rho or T")

    M_g = maxwellian(rho_g, u_g, T_g, g)
    M_l = maxwellian(m.rho, m.u, m.T, g)
    w = mesh.cell_measure * g.cell_measure
    f = field.values
    safe_f = np.maximum(f, floor)
    Hg = w * float((f * np.log(safe_f / M_g)).sum())
    Hl = w * float((f * np.log(safe_f / np.maximum(M_l, floor))).sum())
    Hh = mesh.cell_measure * float(
        (m.rho * np.log(m.rho / m.T ** (g.d / 2.0))).sum())
    return EntropyTriple(Hg=Hg, Hl=Hl, Hh=Hh)


def distance_to_local_equilibrium(field: DistributionField) -> float:
    """L1 distance between the field and its cell-local Maxwellians."""
    g = field.grid
    m = moments(field.values, g)
    M_l = maxwellian(m.rho, m.u, m.T, g)
    return float(field.mesh.cell_measure * g.cell_measure
                 * np.abs(field.values - M_l).sum())
