"""Exception types shared across the package."""


class CgalrError(Exception):
    """Base class for all package-specific errors."""


class InvalidArgument(CgalrError, ValueError):
    """An argument violates an operation's precondition."""


class InvalidData(CgalrError, ValueError):
    """Input data is non-finite or otherwise unusable."""


class InvalidState(CgalrError, RuntimeError):
    """An operation was called in an order its state machine forbids."""


class DisconnectedGraph(CgalrError):
    """A graph operation needs a connected graph but got components.

    ``components`` holds the vertex groups so callers can report exactly
    which signals fell apart.
    """

    def __init__(self, components):
        self.components = [tuple(sorted(c)) for c in components]
        groups = "; ".join(str(list(c)) for c in self.components)
        super().__init__(f"graph is disconnected into {len(self.components)} components: {groups}")


class UndefinedRatio(CgalrError, ZeroDivisionError):
    """A ratio statistic was requested with a zero denominator."""
