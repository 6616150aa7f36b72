"""Exception types shared across the package."""


class AngioKitError(Exception):
    """Base class for all angiokit-specific errors."""


class PgmFormatError(AngioKitError, ValueError):
    """Raster file exists but its header or payload is malformed."""


class OutOfBoundsError(AngioKitError, IndexError):
    """A point lies outside the owning grid."""


class EmptyMaskError(AngioKitError, ValueError):
    """An operation that needs foreground pixels received none."""


class NotAPathError(AngioKitError, ValueError):
    """Skeleton is not a single simple path (extra endpoints or bifurcations)."""


class TooShortError(AngioKitError, ValueError):
    """Centerline has too few points for the requested window/trim."""


class InvalidCenterError(AngioKitError, ValueError):
    """Width measurement was requested at a background pixel."""


class EmptyInputError(AngioKitError, ValueError):
    """An aggregate operation received an empty collection."""


class ShapeMismatchError(AngioKitError, ValueError):
    """Two grids or label lists that must match in size do not."""


class GeometryError(AngioKitError, ValueError):
    """Phantom geometry is invalid (e.g. tube leaves the canvas)."""


class MissingInputError(AngioKitError, FileNotFoundError):
    """A required pipeline input (frame or mask file) is absent."""


class StageError(AngioKitError, RuntimeError):
    """A pipeline stage failed; message is tagged with the stage name."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
