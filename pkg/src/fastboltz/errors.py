"""Exception types shared across the solver."""


class DegenerateStateError(ValueError):
    """Raised when a distribution has too little mass to define macroscopic fields."""


class QuadratureError(RuntimeError):
    """Raised when a kernel-mode quadrature fails its convergence self-check."""


class CflViolationError(ValueError):
    """Raised when a requested time step exceeds the transport CFL bound."""


class StiffnessError(ValueError):
    """Raised when an explicit step is attempted beyond its collision stability bound."""


class OracleCapError(ValueError):
    """Raised when the brute-force collision oracle is asked for a grid above its cap."""


class ConfigError(ValueError):
    """Raised for malformed or semantically invalid run configuration."""


class NumericFailure(RuntimeError):
    """Raised when a run produces non-finite values."""


class CheckpointError(RuntimeError):
    """Raised for unreadable, mismatched, or incompatible checkpoint files."""
