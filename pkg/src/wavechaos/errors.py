"""Exception types shared across the package."""


class WavechaosError(Exception):
    """Base class for all package errors."""


class DomainError(WavechaosError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class SizeError(WavechaosError, ValueError):
    """A requested size exceeds a supported or reachable limit."""


class NumericalError(WavechaosError, ArithmeticError):
    """A numerical procedure failed to reach its tolerance.

    Parameters
    ----------
    message : str
    residual : float, optional
        Best error estimate achieved before giving up.
    """

    def __init__(self, message, residual=float("nan")):
        super().__init__(f"{message} (residual={residual:.3g})")
        self.residual = residual


class ConfigError(WavechaosError, ValueError):
    """Invalid run configuration; ``errors`` lists every problem found."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
