"""Exception types shared across the package."""


class ImfkitError(Exception):
    """Base class for all imfkit errors."""


class DecodeError(ImfkitError):
    """Raised when an image file cannot be read or parsed."""


class UnsupportedDepthError(DecodeError):
    """Raised for images deeper than 8 bits per channel."""


class GeometryError(ImfkitError):
    """Raised when rectangles, crop sizes or image dimensions do not line up."""


class TableError(ImfkitError):
    """Raised for invalid lookup-table operations (non-total tables, ...)."""


class StitchSpecError(ImfkitError):
    """Raised when a stitch spec file is malformed or inconsistent."""
