"""Exceptions raised by the logconn engines.

Every error derives from ValueError so callers that only know about bad
input keep working; mathematical negatives that are ordinary outcomes
(no n-th root, no fixed point, a failing criterion) are returned as values
instead of being raised.
"""


class LogConnError(ValueError):
    """Base class for all logconn errors"""


class FieldMismatchError(LogConnError):
    """Operands live in different cyclotomic fields"""


class FieldDivisionError(LogConnError, ZeroDivisionError):
    """Division by the zero element"""


class RootOfUnityError(LogConnError):
    """Requested root of unity does not exist in the field"""


class UnsplitDenominatorError(LogConnError):
    """A pole (or preimage point) is not expressible over the field"""


class NotAnIsomorphismError(LogConnError):
    """A gauge matrix is not an isomorphism of the named split bundles"""


class ActionNotSemisimpleError(LogConnError):
    """The action matrix does not satisfy R^n = Id"""


class EquivarianceError(LogConnError):
    """The connection is not preserved by the action"""


class WeightsNotSplitError(LogConnError):
    """A residue does not split the quasiparabolic filtration with the stated weights"""


class UnadaptedFrameError(WeightsNotSplitError):
    """Residues at 0 and infinity cannot be split by one automorphism of the bundle"""


class DenominatorMismatchError(LogConnError):
    """The cover degree is not a common denominator of the parabolic weights"""


class NormalizationFailedError(LogConnError):
    """An intertwiner exists but no n-th root normalizes it inside the field"""


class EigenspaceDimensionError(LogConnError):
    """The eigenspaces of a certificate do not all have dimension r/n"""


class CriterionViolatedError(LogConnError):
    """The existence criterion fails, no connection can be built"""


class OhtsukiDefectError(LogConnError):
    """A constructed connection violates degree + sum of residue traces = 0"""


class GrammarError(LogConnError):
    """Malformed scalar or rational-function text"""

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class JobError(LogConnError):
    """A job file does not match the expected schema"""
