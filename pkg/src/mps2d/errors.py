"""Exception hierarchy shared by all mps2d modules."""


class MPSError(Exception):
    """Base class for all mps2d errors."""


class InvalidDomainError(MPSError):
    """Radial function is not strictly positive, or domain is otherwise unusable."""


class DiscretizationError(MPSError):
    """Boundary reparameterization or quadrature construction failed."""


class EvaluationDomainError(MPSError):
    """Special-function argument outside the supported range."""


class SingularityError(MPSError):
    """Basis function evaluated at (or too close to) one of its singular points."""


class BasisConstructionError(MPSError):
    """Charge placement violates the distance-to-boundary requirements."""


class FilterError(MPSError):
    """Spectral multiplier is non-finite on the discretization's frequency grid."""


class DegenerateBasisError(MPSError):
    """All interior mass of the basis fell below the regularization threshold."""


class SlopeEstimationError(MPSError):
    """Local tension slope is non-positive (flat tension, basis too weak)."""


class ConditioningError(MPSError):
    """Requested energy too close to an eigenvalue for a well-conditioned result."""


class ConfigError(MPSError):
    """Malformed or inconsistent run configuration."""
