"""Exception types raised across the package."""


class VWXError(Exception):
    """Base class for all package errors."""


class AdmissibilityError(VWXError, ValueError):
    """A contour state violates the topology or margin constraints."""


class AliasingError(VWXError, ValueError):
    """A grid is too coarse to represent the requested Fourier modes."""


class SingularityError(VWXError, ValueError):
    """A kernel was evaluated on its singular set without a correction."""


class NegativeDiscriminant(VWXError, ValueError):
    """The mode-n linearization has no real bifurcation velocities."""


class NotFound(VWXError, LookupError):
    """No mode satisfying the requested conditions exists below the cap."""


class ZeroOmega(VWXError, ZeroDivisionError):
    """A relation that divides by the angular velocity was given zero."""


class NoConvergence(VWXError, RuntimeError):
    """Newton iteration exhausted its budget."""


class JacobianSingular(VWXError, RuntimeError):
    """The continuation Jacobian is numerically singular (fold or collision)."""


class TopologyBreach(VWXError, RuntimeError):
    """Contours crossed or a point vortex reached a contour during evolution.

    ``state`` carries the last state that passed the topology check.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state
