"""Exception hierarchy shared by the numerical modules and the CLI."""


class NSLorentzError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(NSLorentzError, ValueError):
    """Invalid input: wrong rank, bad index, out-of-domain parameter."""


class RankError(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class LorentzIndexError(ValidationError):
    """Invalid Lorentz index combination."""


class UnsupportedSpecError(ValidationError):
    pass


class SubcriticalityError(ValidationError):
    """Raised when r <= n, where the existence theory does not apply."""


class DivergentIntegralError(ValidationError):
    pass


class NoContractionError(ValidationError):
    pass


class AccuracyError(NSLorentzError):
    """Grid too coarse or box too small for the requested accuracy."""


class NumericError(NSLorentzError, ArithmeticError):
    pass


class ConvergenceError(NSLorentzError):
    """A numerical consistency contract could not be met."""

    def __init__(self, message, values=None):
        super().__init__(message)
        self.values = values


class CannotExtendError(NSLorentzError):
    """Restart criterion violated; carries the blowup threshold."""

    def __init__(self, message, threshold):
        super().__init__(message)
        self.threshold = threshold


class InsufficientDataError(ValidationError):
    pass
