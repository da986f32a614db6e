"""Exception hierarchy shared by all modules."""


class BornFleaError(Exception):
    """Base class for every error raised by the package."""


class InvalidArgumentError(BornFleaError, ValueError):
    """A scalar argument is outside its allowed range."""


class InvalidInputError(BornFleaError, ValueError):
    """A structured input violates its invariants."""


class NumericError(BornFleaError, ArithmeticError):
    """A numerical procedure failed to converge or lost accuracy."""


class DegenerateSpectrumError(NumericError):
    pass


class InvalidMeasureError(InvalidInputError):
    """A flea measure puts mass where the model forbids it (e.g. at delta = 0)."""


class AliasingError(InvalidArgumentError):
    pass


class DomainError(InvalidArgumentError):
    """Evaluation or integration requested outside a sampled domain."""


class DomainTooSmallError(DomainError):
    def __init__(self, message, suggested_bounds=None):
        super().__init__(message)
        self.suggested_bounds = suggested_bounds


class PhaseConventionError(NumericError):
    pass


class ExperimentFailedError(BornFleaError):
    pass


class ConfigError(BornFleaError):
    """Invalid experiment configuration.

    ``violations`` lists every problem found, as ``(field_path, message)`` pairs.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        lines = [f"{path}: {msg}" for path, msg in self.violations]
        super().__init__("invalid configuration:\n  " + "\n  ".join(lines))


class TruncationWarning(UserWarning):
    """An eigen-expansion captures less than the required fraction of the norm."""
