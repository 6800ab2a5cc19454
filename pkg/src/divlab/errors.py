"""Exception hierarchy shared by all divlab modules."""


class DivlabError(Exception):
    """Base class for library errors."""


class DimensionMismatchError(DivlabError, ValueError):
    pass


class OrderError(DivlabError, ValueError):
    """A declared vanishing order is violated or out of range."""


class ResonanceError(DivlabError, ArithmeticError):
    """A divisor vanished (or fell below the resonance threshold).

    ``n`` and ``j`` locate the offending divisor, ``divisor`` is its modulus.
    """

    def __init__(self, message, n=None, j=None, divisor=None, order=None):
        super().__init__(message)
        self.n = n
        self.j = j
        self.divisor = divisor
        self.order = order


class BandOverflowError(DivlabError):
    def __init__(self, message, required_band=None):
        super().__init__(message)
        self.required_band = required_band


class ParameterError(DivlabError, ValueError):
    pass


class ScheduleError(DivlabError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConfigError(DivlabError, ValueError):
    def __init__(self, message, key=None, line=None):
        super().__init__(message)
        self.key = key
        self.line = line
