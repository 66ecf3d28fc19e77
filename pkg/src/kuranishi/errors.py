"""Exception hierarchy shared by every module."""


class KuranishiError(Exception):
    """Base class for all library errors."""


class DimensionError(KuranishiError, ValueError):
    """Shapes or variable counts do not match."""


class InvalidWitnessError(KuranishiError, ValueError):
    """A witness point is not a zero of the section it is attached to."""


class StructuralError(KuranishiError):
    """Missing or dangling references between atlas records."""


class EndpointMismatchError(KuranishiError):
    """Two homotopies (or 2-cells) cannot be chained."""


class PreconditionError(KuranishiError, ValueError):
    """Input violates a documented precondition of a constructor."""


class EmptyRestrictionError(KuranishiError, ValueError):
    """A restriction produced an empty domain."""


class ParseError(KuranishiError, ValueError):
    """Malformed JSON input; ``location`` points at the offending field."""

    def __init__(self, message: str, location: str = "$"):
        super().__init__(f"{location}: {message}")
        self.location = location
