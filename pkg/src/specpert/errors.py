"""Exception hierarchy shared by all modules."""


class SpecpertError(Exception):
    pass


class ParameterRangeError(SpecpertError, ValueError):
    """A model or config parameter is outside its admissible range."""


class ConfigError(SpecpertError, ValueError):
    pass


class ModelError(SpecpertError, ValueError):
    """The limit model is inconsistent (e.g. a density that does not integrate to one)."""


class DomainError(SpecpertError, ValueError):
    """Evaluation point outside the domain of the operation (e.g. real z for a resolvent)."""


class SizeError(SpecpertError, ValueError):
    pass


class PreconditionError(SpecpertError, ValueError):
    pass


class NumericError(SpecpertError, ArithmeticError):
    pass


class ConvergenceError(NumericError):
    pass


class ToleranceError(NumericError):
    """Requested accuracy could not be reached."""
