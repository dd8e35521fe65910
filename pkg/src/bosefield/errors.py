"""Exception and warning types raised by bosefield."""


class BosefieldError(Exception):
    """Base class for all library errors."""


class NotSymmetric(BosefieldError, ValueError):
    pass


class NotPositiveDefinite(BosefieldError, ValueError):
    """The coupling matrix has a (numerically) vanishing or negative eigenvalue.

    For translation-invariant models at maximal coupling this is the zero mode.
    """


ZeroMode = NotPositiveDefinite


class FunctionSingular(BosefieldError, ValueError):
    pass


class NotTranslationInvariant(BosefieldError, ValueError):
    pass


class QuadratureFailure(BosefieldError, RuntimeError):
    pass


class UnsupportedPair(BosefieldError, TypeError):
    pass


class NotSelfAdjoint(BosefieldError, ValueError):
    pass


class NotUnitary(BosefieldError, ValueError):
    pass


class BasisMismatch(BosefieldError, ValueError):
    pass


class NotNormalized(BosefieldError, ValueError):
    pass


class DimensionTooLarge(BosefieldError, ValueError):
    pass


class TruncationWarning(UserWarning):
    """A Fock-space computation is close to the total-quanta cutoff."""


class SearchBudgetExceeded(UserWarning):
    """The localization search stopped on its iteration budget."""
