"""Exception types shared by all layerwaves modules."""


class LayerwavesError(Exception):
    """Base class for every error raised by this package."""


class InvalidMaterial(LayerwavesError):
    """Material parameters violate positivity (rho, mu, lam + 2*mu > 0)."""


class NonIncreasingDepths(LayerwavesError):
    """Interface depths are not strictly increasing."""


class NoJump(LayerwavesError):
    """An interface separates two layers with identical material traces."""


class Glancing(LayerwavesError):
    """A vertical wavenumber is too close to zero to pick a branch."""


class GlancingProximity(LayerwavesError):
    """A configuration sits within tolerance of a glancing/critical angle."""


class ForbiddenIncoming(LayerwavesError):
    """A nonzero incoming amplitude was supplied on an evanescent channel."""


class DegenerateAngle(LayerwavesError):
    """The cotangent form requires xi_1 != 0 and nonzero mode angles."""


class RayleighSingular(LayerwavesError):
    """Traction boundary system is singular: at the Rayleigh variety."""


class StoneleySingular(LayerwavesError):
    """Two-sided evanescent system is singular: at the Stoneley root."""


class ControlImpossible(LayerwavesError):
    """The requested one-sided control problem is over/under-determined."""


class NearSingularControl(LayerwavesError):
    """Control determinant below tolerance (discrete zero set)."""


class Trapped(LayerwavesError):
    """A ray failed to reach any bounding surface within the time budget."""


class OutOfDomain(LayerwavesError):
    """Function argument outside its documented domain."""


class RootNotBracketed(LayerwavesError):
    """A root expected by theory was not bracketed by the search grid."""


class NoKinkFound(LayerwavesError):
    """No interface signature detected in the travel-time curves."""


class NonMonotone(LayerwavesError):
    """Travel-time data inconsistent with speeds nondecreasing in depth."""


class AssumptionViolated(LayerwavesError):
    """A named recovery hypothesis fails for the supplied model."""

    def __init__(self, condition: str, message: str = ""):
        self.condition = condition
        super().__init__(message or f"recovery hypothesis {condition} violated")


class InsufficientCoverage(LayerwavesError):
    """The supplied curves do not cover the branches a recovery step needs."""
