"""Exception hierarchy shared by every solver in the package."""


class TrimerError(Exception):
    """Base class for physics and solver failures."""


class DomainError(TrimerError, ValueError):
    """An input lies outside the domain of the operation."""


class UnsupportedConfigurationError(DomainError):
    pass


class StabilityError(TrimerError):
    """The drift matrix is not Hurwitz, so no stable steady state exists."""


class NumericalError(TrimerError):
    pass


class TruncationError(TrimerError):
    """A Fock-space cutoff leaves too much probability outside the basis."""

    def __init__(self, message: str, required_cutoff: int | None = None):
        super().__init__(message)
        self.required_cutoff = required_cutoff


class ConvergenceError(TrimerError):
    pass


class QuasiSteadyError(TrimerError):
    """The finite-bath evolution did not settle into a plateau before recurrence."""

    def __init__(self, message: str, suggested_modes: int | None = None):
        super().__init__(message)
        self.suggested_modes = suggested_modes


class BracketError(TrimerError):
    pass
