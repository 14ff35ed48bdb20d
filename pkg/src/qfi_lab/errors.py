"""Exception types shared across the package."""


class QfiError(Exception):
    """Base class for all package errors."""


class SingularPoint(QfiError, ValueError):
    """A field was evaluated on (or numerically at) its singular set."""


class BadParams(QfiError, ValueError):
    """Parameters violate the constraints of a catalog entry or potential."""


class SingularApproach(QfiError):
    """Integration came too close to the singular set of the potential."""

    def __init__(self, message, last_state=None, trajectory=None):
        super().__init__(message)
        self.last_state = last_state
        self.trajectory = trajectory


class QuadratureDomain(QfiError, ValueError):
    """A quadrature inversion was requested outside its valid energy range."""


class PathThroughSingularity(QfiError, ValueError):
    """No admissible integration path avoids the singular set."""


class InsufficientPoints(QfiError, ValueError):
    """Too few regular collocation points for the requested unknowns."""


class ValidationFailed(QfiError):
    """A computed nullspace vector failed the held-out residual check."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
