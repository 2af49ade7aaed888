"""Exception hierarchy shared by all exokit modules.

The CLI maps these onto exit codes: input/config problems exit 2,
numerical failures exit 3.
"""


class ExokitError(Exception):
    exit_code = 1


class InputError(ExokitError, ValueError):
    """Malformed or out-of-range input data."""

    exit_code = 2


class ConfigError(ExokitError, ValueError):
    """Invalid configuration (filter settings, specs, run config)."""

    exit_code = 2


class SchemaError(InputError):
    """A file does not follow the expected column layout."""


class NumericalError(ExokitError):
    exit_code = 3


class UnachievableTorqueError(NumericalError):
    pass


class FitError(NumericalError):
    pass


class ConditioningError(FitError):
    pass


class DetectionError(NumericalError):
    pass


class StateError(ExokitError, RuntimeError):
    exit_code = 3
