"""Exception hierarchy shared across the package.

Faults raised mid-integration carry the partial trajectory so callers can
inspect or save what was computed before the failure.
"""

from __future__ import annotations


class AngioError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(AngioError, ValueError):
    """A model parameter, option, or schedule violates its constraints."""


class DomainError(AngioError, ValueError):
    """A state or argument lies outside the mathematical domain of an operation."""


class RangeError(AngioError, ValueError):
    """A time lies outside the domain covered by a trajectory."""


class IntegrationFault(AngioError, RuntimeError):
    """Integration stopped early.  ``time`` is the fault location and
    ``trajectory`` holds the solution finalized up to that point (may be None
    when the very first evaluation failed)."""

    def __init__(self, message: str, time: float, trajectory=None):
        super().__init__(message)
        self.time = time
        self.trajectory = trajectory


class PositivityFault(IntegrationFault):
    """The numerical solution left the open positive cone."""


class DivergenceFault(IntegrationFault):
    """The numerical solution became nonfinite or overflowed."""


class InternalCheckError(AngioError, RuntimeError):
    """Two supposedly equivalent computations disagreed; indicates a bug."""
