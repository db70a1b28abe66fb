"""Exception hierarchy shared by all subpackages.

Errors that come from bad user input derive from :class:`ConfigError` and map
to CLI exit code 2; everything else derives from :class:`KcmLabError` and maps
to exit code 3.
"""


class KcmLabError(Exception):
    """Base class for all domain errors."""


class FamilyError(KcmLabError, ValueError):
    """Invalid family file content; carries the 1-based offending line."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class FamilySyntaxError(FamilyError):
    pass


class OriginInRule(FamilyError):
    pass


class EmptyRule(FamilyError):
    pass


class EmptyFamily(FamilyError):
    pass


class SearchExhausted(KcmLabError):
    """No growth certificate up to ``n_max`` within ``radius``.

    This is a lower bound on the difficulty, never a final value.
    """

    def __init__(self, direction, n_max: int, radius: int):
        self.direction = direction
        self.n_max = n_max
        self.radius = radius
        super().__init__(
            f"difficulty of {direction} exceeds {n_max} within search radius {radius}"
        )


class NotFiniteCritical(KcmLabError):
    pass


class InsertionBoundExceeded(KcmLabError):
    pass


class InfiniteStableSet(KcmLabError):
    pass


class OriginOutsideRegion(KcmLabError):
    pass


class EventNull(KcmLabError):
    pass


class SizeCap(KcmLabError):
    pass


class DegenerateAnnulus(KcmLabError):
    pass


class NotAdmissible(KcmLabError):
    pass


class AssumptionUnmet(KcmLabError):
    pass


class BadPlacement(KcmLabError):
    pass


class NotTypeI(KcmLabError):
    pass


class BelowThreshold(KcmLabError):
    pass


class HypothesisFails(KcmLabError):
    pass


class InsufficientData(KcmLabError):
    pass


class ConfigError(KcmLabError, ValueError):
    """Invalid experiment configuration; ``field`` names the culprit."""

    def __init__(self, field: str, message: str = ""):
        self.field = field
        super().__init__(f"{field}: {message}" if message else field)
