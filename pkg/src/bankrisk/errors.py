"""Exception hierarchy shared by every module."""


class BankRiskError(Exception):
    """Base class for all package errors."""


class ParameterError(BankRiskError, ValueError):
    """A parameter lies outside its documented domain."""


class SingularInputError(ParameterError):
    """Input hits a singular point of a closed-form expression."""


class SingularDesignError(BankRiskError, ValueError):
    """Regression design matrix is rank deficient."""


class ConvergenceError(BankRiskError, RuntimeError):
    """An iterative solver ran out of iterations.

    Attributes
    ----------
    best_residual : float
        Smallest absolute residual seen before giving up.
    """

    def __init__(self, message, best_residual):
        super().__init__(f"{message} (best residual {best_residual:.3e})")
        self.best_residual = best_residual


class ConfigError(BankRiskError, ValueError):
    """Experiment configuration failed validation.

    ``fields`` lists the offending keys.
    """

    def __init__(self, message, fields=()):
        self.fields = list(fields)
        if self.fields:
            message = f"{message}: {', '.join(self.fields)}"
        super().__init__(message)
