"""Exception hierarchy shared by all modules."""


class InfboundError(Exception):
    """Base class for every error raised by this package."""


class ModelError(InfboundError, ValueError):
    """An IC model failed validation. ``line`` is set when it came from a file."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SelfLoopError(ModelError):
    pass


class DuplicateEdgeError(ModelError):
    pass


class ProbOutOfRangeError(ModelError):
    pass


class EmptySeedSetError(ModelError):
    pass


class IndexOutOfRangeError(ModelError):
    pass


class ParseError(ModelError):
    pass


class TooManyEdgesError(InfboundError):
    """Exact enumeration was asked to cover more edges than the cap allows."""

    def __init__(self, n_edges, cap, what=""):
        self.n_edges = n_edges
        self.cap = cap
        msg = f"{n_edges} edges exceeds enumeration cap {cap}"
        if what:
            msg = f"{what}: {msg}"
        super().__init__(msg)


class InvalidBoundsError(InfboundError, ValueError):
    pass


class InvalidHorizonError(InfboundError, ValueError):
    pass


class InvalidParamsError(InfboundError, ValueError):
    pass


class GenerationFailure(InfboundError):
    pass
