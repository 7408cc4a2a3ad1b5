"""Exception types shared across the package."""

from __future__ import annotations


class InvariantViolation(RuntimeError):
    """An identity that must hold exactly failed to do so (a bug, never silent)."""


class ToleranceError(RuntimeError):
    """An adaptive computation failed to reach its target tolerance.

    Carries the best estimate obtained so far in ``best`` and the last
    observed discrepancy in ``achieved``.
    """

    def __init__(self, message: str, best=None, achieved: float | None = None):
        super().__init__(message)
        self.best = best
        self.achieved = achieved


class IntegrationError(RuntimeError):
    """The integrand produced a non-finite value at a quadrature node."""


class PreconditionError(ValueError):
    """An inequality check was asked for a function outside its hypotheses.

    The message states which smoothness requirement failed; callers surface
    this as a skipped row, not a failure.
    """
