"""Exception types shared across the package."""
from __future__ import annotations

__all__ = [
    "UlamTailError",
    "ConfigError",
    "DomainError",
    "NonMonotoneError",
    "OutOfRangeError",
    "UnsupportedError",
    "NoFixedPointError",
    "NotFixedPointError",
    "DegenerateError",
    "NumericalError",
    "NoConvergenceError",
    "EscapeError",
    "GridMismatchError",
    "DivergenceError",
    "IterationCapError",
    "WindowError",
]


class UlamTailError(Exception):
    """Base class for all package errors."""


class ConfigError(UlamTailError):
    """Invalid configuration or constructor parameters."""


class DomainError(UlamTailError):
    """Argument outside the declared domain."""


class NonMonotoneError(UlamTailError):
    """Monotonicity of the map (in x or in omega) is violated."""


class OutOfRangeError(UlamTailError):
    """Target value outside the reachable interval [h_-(x), h_+(x)]."""


class UnsupportedError(UlamTailError):
    """Requested feature outside the supported parameter class."""


class NoFixedPointError(UlamTailError):
    """No fixed point found in the search interval."""


class NotFixedPointError(UlamTailError):
    """Point does not satisfy the fixed-point residual tolerance."""


class DegenerateError(UlamTailError):
    """Boundary classification failed (no usable nonzero derivative)."""


class NumericalError(UlamTailError):
    """Internal numerical consistency check failed."""


class NoConvergenceError(UlamTailError):
    """Iteration hit its budget; the best iterate is attached."""

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class EscapeError(UlamTailError):
    """A simulated orbit left the map domain."""


class GridMismatchError(UlamTailError):
    """Grids of two objects do not cover the same span."""


class DivergenceError(UlamTailError):
    """Iterates stopped increasing before reaching the target interval."""


class IterationCapError(UlamTailError):
    """Forward iteration exceeded the step cap."""


class WindowError(UlamTailError):
    """Fewer than the minimum number of usable fitting-window points."""
