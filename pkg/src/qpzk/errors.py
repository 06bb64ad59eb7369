"""Exception types shared across the package."""


class QpzkError(Exception):
    """Base class for all package errors."""


class RegisterError(QpzkError):
    """Bad register layout: duplicate names, unknown register, empty layout."""


class DimensionMismatchError(QpzkError):
    """Operands act on incompatible Hilbert-space dimensions."""


class QubitCapExceededError(QpzkError):
    """A layout or construction would exceed the configured qubit cap."""


class StateValidationError(QpzkError):
    """A state, unitary or measurement fails its defining invariant."""


class ZeroProbabilityError(QpzkError):
    """Post-selection on an outcome of probability zero."""


class OracleBudgetError(QpzkError):
    """A simulator exceeded its declared oracle-call budget."""


class ConfigError(QpzkError):
    """Experiment configuration failed validation; message names the field."""
