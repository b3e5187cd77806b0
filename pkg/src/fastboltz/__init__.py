"""Deterministic solver for rarefied gas dynamics in bounded domains:
Fourier-spectral collision evaluation (dense and fast decoupled paths),
second-order finite-volume transport with Maxwell-type walls, and an
asymptotic-preserving IMEX time integrator."""

from .collision import (ClassicalCollision, DenseFastReference, FastCollision,
                        collide_classical, collide_fast)
from .diagnostics import entropies, kinetic_entropy
from .errors import (CflViolationError, CheckpointError, ConfigError,
                     DegenerateStateError, NumericFailure, OracleCapError,
                     QuadratureError, StiffnessError)
from .kernels import (VhsKernel, precompute_beta_classical,
                      precompute_beta_fast)
from .mesh import BoundarySpec, DistributionField, SpatialMesh
from .oracle import collide_oracle
from .scenarios import (ScenarioConfig, build_ghost_effect, build_poiseuille,
                        build_temperature_gradient,
                        build_trend_to_equilibrium, load_preset)
from .spectral import forward_transform, inverse_transform
from .stepping import (StepConfig, cfl_dt, explicit_step, imex_step,
                       lambda_estimate, step)
from .transport import (boundary_face_distribution, force_increment, minmod,
                        transport_increment)
from .velocity import (EntropyTriple, Moments, VelocityGrid, maxwellian,
                       maxwellian_from, moments)

__version__ = "0.1.0"
