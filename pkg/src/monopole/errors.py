"""Exception types raised by the solver."""
from __future__ import annotations

__all__ = [
    "MonopoleError",
    "DomainError",
    "SingularPointError",
    "HandoffError",
    "ContractionDomainError",
    "NoEventError",
    "IntegrityError",
    "StiffnessError",
    "BracketingError",
    "AuditDomainError",
    "FitDomainError",
    "SturmDomainError",
]


class MonopoleError(Exception):
    """Base class for all solver errors."""


class DomainError(MonopoleError, ValueError):
    """An argument lies outside the operation's domain."""


class SingularPointError(DomainError):
    """The right-hand side was evaluated at t <= 0, where it is singular."""


class HandoffError(DomainError):
    """Series handoff requested outside the validity window of the origin expansion."""


class ContractionDomainError(DomainError):
    """Picard verification requested beyond the guaranteed contraction threshold."""


class NoEventError(MonopoleError):
    """Event refinement was asked to localize a crossing that is not bracketed."""


class IntegrityError(MonopoleError):
    """An internal consistency check failed (theoretically impossible state)."""


class StiffnessError(MonopoleError):
    """Adaptive step size underflowed before reaching the integration horizon."""


class BracketingError(MonopoleError):
    """No sign-changing bracket was found within the allowed parameter range.

    Carries the probed endpoints and their outcomes so the caller can report
    what was actually observed.
    """

    def __init__(self, message: str, outcomes: dict | None = None):
        super().__init__(message)
        self.outcomes = dict(outcomes or {})


class AuditDomainError(DomainError):
    """Audit requested on a trajectory that did not converge."""


class FitDomainError(DomainError):
    """Decay fit requested on data where the log-linear model is undefined."""


class SturmDomainError(DomainError):
    """Probe profile left the interval (0, 1] required by the comparison argument."""
