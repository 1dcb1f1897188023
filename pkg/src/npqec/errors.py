"""Exception taxonomy shared across the package.

Every failure mode that a caller might reasonably branch on gets its own
class; everything derives from :class:`NPQECError` so that CLI entry points
can separate domain failures from genuine bugs.
"""


class NPQECError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(NPQECError):
    """An operator or state was requested with an unusable truncation."""


class TruncationError(NPQECError):
    """A constructed state leaks too much weight into the top Fock levels.

    Carries the measured tail mass so callers can decide how to enlarge the
    space.
    """

    def __init__(self, message, tail_mass=None):
        super().__init__(message)
        self.tail_mass = tail_mass


class NormalizationError(NPQECError):
    """A state that must be normalized is not."""


class SupportError(NPQECError):
    """An operator has weight outside the declared Fock-shift range."""


class NotCompletelyPositiveError(NPQECError):
    """A Choi matrix eigenvalue is negative beyond tolerance."""


class PhaseUncertaintyUndefinedError(NPQECError):
    """The Holevo phase uncertainty diverges (zero neighbor-amplitude sum)."""


class DegenerateShiftError(NPQECError):
    """A Fock shift annihilated the state (zero-norm result)."""


class WindowError(NPQECError):
    """An error-window split (G, L) is inconsistent with the code distance."""


class ResourceGuardError(NPQECError):
    """A two-mode or circuit-level simulation exceeds its size guard."""


class SpacingError(NPQECError):
    """Repeater spacing so large that the per-hop loss reaches unity."""


class OptimizationFailedError(NPQECError):
    """Every evaluation in an optimization run failed.

    Carries the evaluation log for post-mortem inspection.
    """

    def __init__(self, message, log=None):
        super().__init__(message)
        self.log = log if log is not None else []


class NumericalFailureError(NPQECError):
    """A numerical invariant (positivity, closure) broke during simulation."""


class DecoderMismatchWarning(UserWarning):
    """Leakage above 0.5: almost certainly a sign-convention or window bug."""
