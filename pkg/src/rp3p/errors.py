"""Exception hierarchy for positioning failures.

Every failure mode of the pipeline maps to a distinct exception so that the
simulation harness can attribute per-trial failures to a stage.
"""


class PositioningError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(PositioningError):
    """A physical or camera parameter is outside its valid domain."""


class PointBehindCameraError(PositioningError):
    """A world point maps to non-positive camera-frame depth (not imageable)."""


class InvalidBearingError(PositioningError):
    """A bearing vector is zero-length or otherwise unusable."""


class DegenerateGeometryError(PositioningError):
    """Geometry too ill-conditioned to solve (coincident points, collapsed angles)."""


class InvalidProblemError(PositioningError):
    """A P3P problem violates its invariants (triangle inequality, angle range)."""


class NoCandidateError(PositioningError):
    """The distance solver found no positive real solution."""


class InvalidIncidenceError(PositioningError):
    """An incidence angle is at or beyond 90 degrees, so the channel inversion fails."""


class DisambiguationError(PositioningError):
    """No distance candidate satisfies the irradiance constraints at any tolerance."""


class SingularGeometryError(PositioningError):
    """The trilateration system matrix is singular (LEDs collinear in plan view)."""


class InconsistentDistanceError(PositioningError):
    """An estimated distance is shorter than the planar distance it must cover."""


class BaselineFailureError(PositioningError):
    """The 4-LED baseline could not disambiguate any candidate."""


class EstimationError(PositioningError):
    """A pipeline stage failed; carries the stage name for diagnostics."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


class ConfigError(PositioningError):
    """A scenario configuration file or dict is malformed."""
