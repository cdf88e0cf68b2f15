"""Exception and warning types raised across the package."""


class SlabSPDCError(Exception):
    """Base class for all errors raised by slabspdc."""


class PhysicsError(SlabSPDCError):
    """A physically impossible request (cut-off mode, broken guidance)."""


class CutoffError(PhysicsError):
    """The requested mode is not guided at this wavelength."""

    def __init__(self, mu, wavelength, message=None):
        self.mu = mu
        self.wavelength = wavelength
        super().__init__(
            message or f"mode {mu} is cut off at wavelength {wavelength!r} um"
        )


class DomainError(SlabSPDCError, ValueError):
    """Argument outside the domain where a formula is defined."""


class EmptyCurve(PhysicsError):
    """Every sample of a dispersion curve lies past cut-off."""


class StencilError(PhysicsError):
    """A finite-difference stencil is unavailable or hits cut-off."""


class InvalidLayerLength(SlabSPDCError, ValueError):
    pass


class GuidanceViolation(PhysicsError):
    """A layer's cladding index is not below its core index."""


class QuadratureNonConvergence(SlabSPDCError, ArithmeticError):
    pass


class GridTooCoarse(SlabSPDCError, ValueError):
    pass


class GridMismatch(SlabSPDCError, ValueError):
    pass


class IndexOutOfRange(SlabSPDCError, IndexError):
    pass


class ConfigError(SlabSPDCError, ValueError):
    """The run configuration does not validate."""


class ChannelForbidden(UserWarning):
    """The mode triple violates the parity rule; its spectrum is zero."""
