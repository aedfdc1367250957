"""Exception hierarchy shared by all indexlab modules."""


class IndexLabError(Exception):
    """Base class for all errors raised by this package."""


class NotInvertible(IndexLabError):
    """Inversion requested for an element with no representable inverse."""


class GradeMismatch(IndexLabError):
    """A graded scalar had the wrong grade structure for the operation."""


class ShapeError(IndexLabError):
    """Incompatible matrix or fiber dimensions."""


class NotTraceClass(IndexLabError):
    """Trace requested for an element outside the traceable ideal."""


class SymbolNotElliptic(IndexLabError):
    """Symbol determinant vanishes (or nearly vanishes) where it must not."""


class UnsupportedSymbol(IndexLabError):
    """Symbol lies outside the exactly invertible class."""


class AlgebraViolation(IndexLabError):
    """An algebra-context identity failed; the context is wired wrongly."""


class BadIdempotent(IndexLabError):
    """Element fails p*p == p where an idempotent is required."""


class BadParameter(IndexLabError):
    """Parameter outside the supported range."""


class GapClosed(IndexLabError):
    """Spectral gap of the lattice model is closed at the requested mass."""


class DegreeError(IndexLabError):
    """Chain and cochain degrees do not match, or parity is wrong."""


class TooLarge(IndexLabError):
    """Requested computation exceeds the configured dimension budget."""


class UsageError(IndexLabError):
    """Malformed command-line or experiment request."""


class IoError(IndexLabError):
    """Report could not be written."""
