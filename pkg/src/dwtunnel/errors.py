"""Exception types raised across the package."""


class DWTunnelError(Exception):
    """Base class for all package errors."""


class ConfigurationError(DWTunnelError, ValueError):
    """Invalid parameters or configuration document.

    ``key`` names the offending field when one can be identified.
    """

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class DomainError(DWTunnelError, ValueError):
    """An operation was called outside its mathematical domain."""


class NumericalFailure(DWTunnelError, ArithmeticError):
    """Propagation produced non-finite amplitudes or a singular solve."""

    def __init__(self, message, tau=None):
        super().__init__(message)
        self.tau = tau
