"""Exception types shared across the package.

Every error carries enough context to act on (level, counts, retry factors);
nothing is ever silently patched.
"""

from __future__ import annotations


class FibspecError(Exception):
    """Base class for all package errors."""


class TraceOverflow(FibspecError):
    """A plain-float trace sequence left the representable range.

    Recompute with ``value_mode='log'`` (signed-log arithmetic), which is
    overflow-free.
    """


class BandCountMismatch(FibspecError):
    """A band scan found the wrong number of sign changes at some level."""

    def __init__(self, level: int, found: int, expected: int, refinement: int):
        self.level = level
        self.found = found
        self.expected = expected
        #: suggested grid-density multiplier for a retry
        self.refinement = refinement
        super().__init__(
            f"level {level}: found {found} sign changes, expected {expected}; "
            f"retry with scan density x{refinement}"
        )


class NotApplicable(FibspecError):
    """Operation requested outside its validity range (e.g. typing at lambda <= 4)."""


class StructureViolation(FibspecError):
    """Band nesting structure check failed; carries the offending band."""

    def __init__(self, message: str, band=None):
        self.band = band
        super().__init__(message)


class DimensionTooLarge(FibspecError):
    """Dense eigensolver backend requested above its size cap."""


class DomainError(FibspecError):
    """Scalar argument outside the documented domain."""


class BracketFailure(FibspecError):
    """A root bracket could not be established."""


class RootNotBracketed(FibspecError):
    """Bowen-root bisection endpoints do not straddle zero."""


class EigenFailure(FibspecError):
    """Jacobian eigenstructure did not match the expected {mu, ~+-1, 1/mu} pattern."""


class NotTransitive(FibspecError):
    """Markov transition matrix is not irreducible."""


class ShiftHitsEigenvalue(FibspecError):
    """Sturm pivot vanished at the requested shift (retried internally)."""


class CoverageFailure(FibspecError):
    """Gap labelling did not cover every requested label."""

    def __init__(self, missing):
        self.missing = list(missing)
        super().__init__(f"uncovered gap labels: {self.missing}")


class BoundaryContamination(FibspecError):
    """Wavepacket mass reached the edge of the finite volume."""
