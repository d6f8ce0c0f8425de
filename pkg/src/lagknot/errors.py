"""Exception types raised by the geometry and index kernels."""


class LagknotError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateInputError(LagknotError, ValueError):
    """A frame or matrix is too ill-conditioned for a rank decision."""


class DegenerateCrossingError(LagknotError):
    """A crossing form is (numerically) singular at the reported time."""

    def __init__(self, time, eigenvalues):
        self.time = float(time)
        self.eigenvalues = eigenvalues
        super().__init__(f"non-regular crossing at t={self.time:.12g} "
                         f"(crossing form eigenvalues {eigenvalues})")


class ResolutionError(LagknotError):
    """A dimension jump could not be resolved by refinement."""


class IntegrationError(LagknotError):
    """An integrator or quadrature lost accuracy."""


class ZeroSectionError(LagknotError, ValueError):
    """An operation that is undefined on the zero-section was applied there."""


class AxisError(LagknotError, ValueError):
    """A rotation axis degenerated to zero."""


class ProximityError(LagknotError):
    """A loop or path comes too close to the branch curve."""


class CountUncertainError(LagknotError):
    """Intersection counting could not certify a cluster."""
