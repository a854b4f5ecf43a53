"""Exception hierarchy shared by all geomphase modules."""


class GeomPhaseError(Exception):
    """Base class for all errors raised by this package."""


class NonHermitianInput(GeomPhaseError):
    """A matrix that should be Hermitian is not, beyond tolerance."""


class GapTooSmall(GeomPhaseError):
    """Spectral gap (or continuation overlap) too small to proceed."""


class StepTooLarge(GeomPhaseError):
    """Integrator step would advance the phase too far per step."""


class InvalidAmplitudes(GeomPhaseError):
    """Initial-state amplitudes are not normalized."""


class OrthogonalNeighbors(GeomPhaseError):
    """Adjacent path samples are (nearly) orthogonal; the discrete
    overlap-product phase is ill-defined."""


class GridTooCoarse(GeomPhaseError):
    """Sampling grid cannot resolve the integrand."""


class NonFinite(GeomPhaseError, ValueError):
    """A value that must be finite is NaN or infinite."""


class DimensionMismatch(GeomPhaseError):
    """Operand dimensions are incompatible with the operation."""


class AntipodalEndpoints(GeomPhaseError):
    """Geodesic closure between antipodal points is ill-defined."""


class TooCoarse(GeomPhaseError):
    """Spherical polyline segments too long for reliable geometry."""


class InvalidGamma(GeomPhaseError):
    """Gamma-scaled amplitudes are not normalizable for the requested T."""
