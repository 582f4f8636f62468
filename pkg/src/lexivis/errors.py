"""Exception types shared across the package.

Plain argument mistakes (bad shapes, out-of-range parameters) raise
``ValueError``; the classes below mark failures a caller may want to
handle distinctly, e.g. to map them to CLI exit codes.
"""


class LexivisError(Exception):
    """Base class for package-specific failures."""


class ConfigurationError(LexivisError):
    """Layer wiring or shape configuration that cannot produce output."""


class ManifestError(LexivisError):
    """Weight manifest is unreadable, malformed, or violates the schema."""


class IntegrityError(LexivisError):
    """A weight blob failed its checksum."""


class FormatError(LexivisError):
    """A weight blob has the wrong byte length for its declared shape."""


class DegenerateFitError(LexivisError):
    """Too few points or zero variance; no meaningful line can be fitted."""


class CountsFormatError(LexivisError):
    """A word-count CSV or JSON file could not be parsed."""
