"""Exception types raised across the package."""


class CMCLabError(Exception):
    """Base class for all errors raised by cmclab."""


class DomainError(CMCLabError, ValueError):
    """An argument lies outside the domain of an operation."""


class BranchError(DomainError):
    """A polar angle does not reach the requested conic branch."""


class RangeError(DomainError):
    """An arclength lies outside the sampled or integrable range."""


class GridMismatchError(CMCLabError, ValueError):
    """Sampled data does not live on the expected grid."""


class NoRootError(CMCLabError):
    """A bracketing scan found no sign change."""


class AxisCollisionError(CMCLabError):
    """A profile curve reached the rotation axis."""


class IntegrationError(CMCLabError):
    """An ODE integrator failed to complete."""


class SingularSystemError(CMCLabError):
    """A boundary value problem has a nontrivial homogeneous kernel."""


class CertificateError(CMCLabError):
    """A numerical certificate failed one of its checks."""


class EmbeddednessError(CMCLabError):
    """A normal perturbation pushed the surface onto the axis."""


class ConfigError(CMCLabError, ValueError):
    """A run configuration is malformed or names unknown keys."""
