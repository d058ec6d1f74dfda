"""Exception hierarchy shared by every module."""

__all__ = [
    "CausalEqError",
    "GraphError",
    "CycleError",
    "DuplicateEdgeError",
    "SelfLoopError",
    "UnknownNodeError",
    "OverlapError",
    "NotObservableError",
    "NodeSetMismatchError",
    "ObservableSetMismatchError",
    "InconsistentPatternError",
    "SizeBoundError",
    "BidirectedDetectedError",
    "OracleFailure",
    "TooManyVariablesError",
    "IncompleteCptError",
    "UnknownVariableError",
    "ParseError",
]


class CausalEqError(Exception):
    """Base class for all domain errors raised by the package."""


class GraphError(CausalEqError, ValueError):
    pass


class CycleError(GraphError):
    def __init__(self, cycle):
        self.cycle = tuple(cycle)
        super().__init__("edge closes the directed cycle " + " -> ".join(self.cycle))


class DuplicateEdgeError(GraphError):
    pass


class SelfLoopError(GraphError):
    pass


class UnknownNodeError(GraphError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown node"


class OverlapError(GraphError):
    pass


class NotObservableError(GraphError):
    pass


class NodeSetMismatchError(GraphError):
    pass


class ObservableSetMismatchError(GraphError):
    pass


class InconsistentPatternError(GraphError):
    pass


class SizeBoundError(GraphError):
    pass


class BidirectedDetectedError(CausalEqError):
    """The latent-free promise was violated: recovery produced a two-headed link."""


class OracleFailure(CausalEqError):
    pass


class TooManyVariablesError(CausalEqError, ValueError):
    pass


class IncompleteCptError(CausalEqError, ValueError):
    pass


class UnknownVariableError(CausalEqError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown variable"


class ParseError(CausalEqError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
