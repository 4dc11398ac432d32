"""Exception hierarchy shared by every module of the package."""


class NSStabError(Exception):
    """Base class for all package errors."""


class DomainError(NSStabError, ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class ConfigurationError(NSStabError, ValueError):
    """A constitutive law or run configuration cannot be used as given."""


class DegenerateJump(NSStabError, ValueError):
    """Equal boundary densities: the jump relation does not fix the momentum."""


class NoRealJump(NSStabError, ValueError):
    """The jump relations have no real solution for the given states."""


class SolverError(NSStabError, RuntimeError):
    """A root finder, quadrature or ODE integration failed to converge."""


class VacuumError(NSStabError, RuntimeError):
    """The density dropped below the configured vacuum floor."""

    def __init__(self, message, x=None, t=None):
        super().__init__(message)
        self.x = x
        self.t = t


class TimestepError(NSStabError, RuntimeError):
    """The stable time step collapsed."""


class UsageError(NSStabError, ValueError):
    """Inputs are structurally incompatible (grid mismatch, empty series, ...)."""
