"""Exception hierarchy. Every error carries the CLI exit code it maps to."""


class RestrictionError(Exception):
    """Base class for all engine errors."""

    exit_code = 2

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class ParseError(RestrictionError):
    """Malformed polynomial text, germ file, scene file or coefficient list."""

    def __init__(self, message: str, position: int = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class GermError(RestrictionError):
    """A germ, branch or symmetry failed a load-time check."""


class UndefinedDegreeError(RestrictionError):
    """Quasi-degree requested for the zero polynomial."""


class DegreeOverflowError(RestrictionError):
    """Form degree or quasi-degree beyond what the operation supports."""


class NotTangentError(RestrictionError):
    """Vector field is not tangent to the germ."""


class NotClosedError(RestrictionError):
    """Restriction does not lie in the closed subspace."""


class PreconditionError(RestrictionError):
    """Operation called outside its domain."""


class FrameDegenerateError(RestrictionError):
    """Branch jets do not span the expected frame."""


class BoundExhaustedError(RestrictionError):
    """A truncation bound or search ceiling was reached."""

    exit_code = 3


class UnknownNameError(RestrictionError):
    """No germ or class with the requested name."""
