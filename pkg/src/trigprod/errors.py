"""Exception types raised by the evaluators.

Every error derives from :class:`TrigProdError` so callers (the CLI in
particular) can map failures onto exit codes without string matching.
"""


class TrigProdError(Exception):
    """Base class for all library errors."""


class PoleProximity(TrigProdError, ValueError):
    """An argument lies within the pole guard of some factor.

    Attributes:
        fn: name of the function whose pole (or zero, for logarithms) was hit.
        arg: the offending argument.
        k: term index, filled in by the product evaluators when known.
        detail: free-form extra context, e.g. which gamma factor failed.
    """

    def __init__(self, fn, arg, k=None, detail=None):
        self.fn = fn
        self.arg = arg
        self.k = k
        self.detail = detail
        super().__init__(self._message())

    def _message(self):
        msg = f"{self.fn} argument {self.arg} is within the pole guard"
        if self.k is not None:
            msg += f" (factor index k={self.k})"
        if self.detail:
            msg += f" [{self.detail}]"
        return msg

    def at_index(self, k):
        """Return a copy tagged with term index ``k``."""
        return PoleProximity(self.fn, self.arg, k=k, detail=self.detail)


class IndexOutOfRange(TrigProdError, ValueError):
    pass


class UnsupportedFormula(TrigProdError, ValueError):
    pass


class RangeCapExceeded(TrigProdError, ValueError):
    """Truncation length or exponent size beyond the hard caps."""


class ToleranceUnreachable(TrigProdError):
    """The requested tolerance cannot be met.

    ``achievable`` holds the best remainder estimate that was available, or
    ``None`` when the tolerance is below the precision floor.
    """

    def __init__(self, message, achievable=None):
        super().__init__(message)
        self.achievable = achievable


class InsufficientSamples(TrigProdError):
    pass
