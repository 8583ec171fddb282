"""Exception types shared across the package."""
from __future__ import annotations


class ConeViolationError(ValueError):
    """An eigenvalue vector left the admissibility cone.

    ``index`` is the 1-based order j of the first elementary symmetric
    polynomial with S_j <= 0; ``value`` is that S_j; ``location`` optionally
    identifies the grid node (or sample) where the violation occurred.
    """

    def __init__(self, index, value, location=None):
        self.index = index
        self.value = value
        self.location = location
        where = f" at {location}" if location is not None else ""
        super().__init__(
            f"cone violation{where}: S_{index} = {value:.6g} <= 0"
        )


class SamplingError(RuntimeError):
    """Rejection sampling exhausted its attempt budget."""


class NonConvergenceError(RuntimeError):
    """Newton iteration failed; carries the last iterate and residual."""

    def __init__(self, message, residual_norm, field=None, iterations=0):
        self.residual_norm = residual_norm
        self.field = field
        self.iterations = iterations
        super().__init__(
            f"{message} (residual {residual_norm:.3e} after {iterations} iterations)"
        )


class ContinuationError(RuntimeError):
    """The homotopy step size underflowed; carries the trace so far."""

    def __init__(self, message, trace):
        self.trace = trace
        super().__init__(message)


class ConstructionError(RuntimeError):
    """A constructive search (bisection for the convex anchor) failed."""
