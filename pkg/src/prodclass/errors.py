"""Exception types. Each maps to a CLI exit code."""


class ProdclassError(Exception):
    exit_code = 1


class ConfigError(ProdclassError, ValueError):
    """Invalid configuration or hyperparameters."""

    exit_code = 1


class DataError(ProdclassError, ValueError):
    """Bad or inconsistent input data."""

    exit_code = 2


class NumericError(ProdclassError, ArithmeticError):
    """Training diverged or produced non-finite values."""

    exit_code = 3


class NotFittedError(ProdclassError, RuntimeError):
    exit_code = 1
