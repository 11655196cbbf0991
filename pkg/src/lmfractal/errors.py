"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the set where a quantity is defined."""


class ConstructionError(RuntimeError):
    """A sampler could not be built (e.g. a covariance is not positive semidefinite)."""

    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class ResourceError(RuntimeError):
    """A request exceeds a fixed size limit."""


class EstimationError(RuntimeError):
    """Too little usable data to form an estimate."""
