"""Exception types shared across the package."""


class DomainError(ValueError):
    """A physical or numerical input is outside its valid domain."""


class SingularModelError(ArithmeticError):
    """A structural matrix that must be invertible is singular."""


class ConditioningError(ArithmeticError):
    """A closed-loop solve is singular or too ill-conditioned to trust."""

    def __init__(self, message: str, axial_depth: float, rcond: float):
        super().__init__(message)
        self.axial_depth = axial_depth
        self.rcond = rcond


class NumericalError(RuntimeError):
    """An iterative numerical routine failed to converge."""


class ConfigError(ValueError):
    """A run configuration file failed to parse or validate."""
