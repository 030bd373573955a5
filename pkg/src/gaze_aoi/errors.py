"""Exception types shared across the package."""


class GazeAoiError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(GazeAoiError):
    """Input could not be decoded (bad JSON, non-numeric field, ...)."""


class FormatError(GazeAoiError):
    """Input decoded fine but violates the expected structure or an invariant."""


class MissingInputError(GazeAoiError):
    """A required input file or configuration value is absent."""


class AlignmentError(GazeAoiError):
    """Two inputs that must be aligned frame-for-frame are not."""
