"""Exception types raised across the package."""


class InvalidArgumentError(ValueError):
    pass


class UnsupportedGeometryError(InvalidArgumentError):
    pass


class DegenerateShiftError(InvalidArgumentError):
    """A lattice site sits exactly on the Dirac center, so its phase is undefined."""


class GapClosedError(RuntimeError):
    """The Fermi level is not separated from the spectrum by the required gap."""

    def __init__(self, message, gap=None):
        super().__init__(message)
        self.gap = gap


class NumericalInconsistencyError(RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class AmbiguousKernelError(RuntimeError):
    """Singular values crowd the kernel tolerance, so kernel counts are not well defined."""

    def __init__(self, message, singular_values=None):
        super().__init__(message)
        self.singular_values = singular_values


class ConfigError(InvalidArgumentError):
    pass
