"""Exception hierarchy shared by all fratio modules."""


class FRatioError(Exception):
    """Base class for every error raised by this package."""


class DomainError(FRatioError, ValueError):
    """An argument lies outside the domain of the function."""


class ParameterError(DomainError):
    """Distribution parameters violate their validity region."""


class PoleError(DomainError):
    """A gamma function was evaluated at one of its poles."""


class DivergentMomentError(DomainError):
    """The requested moment does not exist for the given parameters."""


class FitDomainError(DomainError):
    """A log-normal moment match is undefined (missing moment or sigma^2 <= 0)."""


class NumericalError(FRatioError, ArithmeticError):
    """A numerical routine failed to deliver the requested accuracy."""


class NonConvergenceError(NumericalError):
    """An iterative or adaptive routine hit its iteration cap."""


class DivergenceError(NumericalError):
    """A series does not converge in the requested regime."""


class CancellationError(NumericalError):
    """Rounding in an alternating series would exceed the promised accuracy."""


class EmptyStripError(DomainError):
    """A Mellin-Barnes kernel has no pole-free strip for the contour."""


class PoleCollisionError(NumericalError):
    """Left poles of a kernel coincide, so the simple-residue series is undefined."""


class PoleTieError(NumericalError):
    """Several pole families share the dominant pole."""


class ConfigError(FRatioError):
    """A scenario document is malformed or violates a constraint."""
