"""Exception types shared across the package."""


class LoheSyncError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(LoheSyncError):
    """A config value violates its documented constraints."""


class GridMismatchError(ConfigurationError):
    """Fields or operators built on different grids were combined."""


class ContractViolationError(LoheSyncError):
    """An operation was called outside its stated domain of validity."""


class UnsupportedRegimeError(ContractViolationError):
    """A closed-form result was requested where none exists."""


class ExcludedInitialStateError(ContractViolationError):
    """The initial correlation sits on the excluded stable manifold."""


class SeriesTooShortError(ContractViolationError):
    """A time series has too few samples for the requested analysis."""


class DivergenceError(LoheSyncError):
    """Time stepping produced a non-finite value.

    Carries enough state to diagnose where the blow-up happened and to
    inspect the last finite ensemble.
    """

    def __init__(self, message, step_index=None, time=None, partial=None):
        super().__init__(message)
        self.step_index = step_index
        self.time = time
        self.partial = partial
