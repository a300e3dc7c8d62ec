"""Exception hierarchy shared by all modules."""


class CornerflowError(Exception):
    """Base class for all package errors."""


class DomainError(CornerflowError, ValueError):
    """Input outside the mathematical domain of an operation."""


class StateError(CornerflowError):
    """Thermodynamic state error (e.g. no subsonic root exists)."""


class SubsonicityError(StateError):
    """Inverted density is within the configured margin of criticality."""


class GeometryError(CornerflowError):
    """Requested ball/arc/support leaves the field's grid."""


class StencilError(CornerflowError):
    """Finite-difference stencil too close to a free boundary."""


class NumericalError(CornerflowError):
    """Iteration failed to converge; carries the final residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class InternalConsistencyError(CornerflowError):
    """A bracketing/sanity check failed, indicating an implementation bug."""


class FrequencyUndefinedError(CornerflowError):
    """Frequency quantities requested at a radius where J(r) = 0."""


class InsufficientDataError(CornerflowError):
    """Too few usable radii for an extrapolation."""


class AmbiguousMatchError(CornerflowError):
    """Two theoretical densities are within the ambiguity threshold."""


class ConfigError(CornerflowError):
    """Malformed run configuration; carries line/field information."""
