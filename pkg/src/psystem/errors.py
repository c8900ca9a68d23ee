"""Exception types raised across the package."""


class PSystemError(Exception):
    """Base class for all package errors."""


class WrongSide(PSystemError):
    """A state lies on the wrong side of a hyperbolic anchor."""


class QuadratureFailure(PSystemError):
    """Adaptive quadrature did not reach its tolerance."""


class OutOfRange(PSystemError):
    """Requested value lies outside the attainable range of a transform."""


class BoundaryDegeneracy(PSystemError):
    """Quantity is singular inside the hyperbolic boundary band."""


class StartNotHyperbolic(PSystemError):
    """Characteristic seed lies outside the hyperbolic region."""


class InsufficientFrames(PSystemError):
    """Not enough stored frames for a time difference."""


class StepRejected(PSystemError):
    """A solver step exceeded the gradient or spectral-tail limits."""

    def __init__(self, message, reason="", t_last=None):
        super().__init__(message)
        self.reason = reason
        self.t_last = t_last


class InitialNotHyperbolic(PSystemError):
    """Initial frame is not contained in a single hyperbolic component."""


class DegenerateInterval(PSystemError):
    """Elliptic interval has zero width."""


class OutsideEllipticBand(PSystemError):
    """Frame values leave the closed elliptic interval."""

    def __init__(self, message, points=()):
        super().__init__(message)
        self.points = list(points)


class NoConvergence(PSystemError):
    """Iterative solver stopped before meeting its tolerance."""


class StepFailure(PSystemError):
    """Trajectory integration produced non-finite values."""


class ParseError(PSystemError):
    """Run-config text could not be parsed."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class ValidationError(PSystemError):
    """Run-config values failed validation."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
