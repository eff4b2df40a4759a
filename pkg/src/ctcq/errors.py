"""Exception hierarchy shared across the package."""


class CTCError(Exception):
    """Base class for every domain error raised by ctcq."""

    code = "ctc-error"


class DimensionMismatchError(CTCError, ValueError):
    code = "dimension-mismatch"


class NotADensityError(CTCError, ValueError):
    code = "not-a-density"


class UnphysicalBlochVectorError(CTCError, ValueError):
    code = "unphysical-bloch-vector"


class PostselectionImpossibleError(CTCError):
    """The projection onto the maximally entangled pair has zero weight."""

    code = "postselection-impossible"


class DegenerateProbeError(CTCError, ValueError):
    code = "degenerate-probe"


class NoFixedPointError(CTCError, RuntimeError):
    """Internal error: a CPTP map always has a density fixed point."""

    code = "no-fixed-point"


class DegenerateDenominatorError(CTCError, ZeroDivisionError):
    code = "degenerate-denominator"
