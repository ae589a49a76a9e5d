"""Exception and warning types shared across the package."""


class QCramerError(Exception):
    """Base class for all package errors."""


class DomainError(QCramerError, ValueError):
    """An argument lies outside the domain of a deformed function."""


class ParameterError(QCramerError, ValueError):
    """Distribution or deformation parameters violate a constraint."""


class AccuracyError(QCramerError, ArithmeticError):
    """A numerical result cannot be delivered within its error budget."""


class InfeasibleError(QCramerError):
    """No parameter value is compatible with the observed data."""


class AccuracyWarning(UserWarning):
    """A result was returned but its error bound exceeds the usual budget."""
