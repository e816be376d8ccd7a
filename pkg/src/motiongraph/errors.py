"""Exception hierarchy shared by the engine, the CLI, and the HTTP API.

Stable error codes (CLI exit codes and the ``code`` field of HTTP error
bodies): 1 usage, 2 degenerate graph, 3 infeasible query, 4 I/O or schema.
"""


class EngineError(Exception):
    """Base class for all engine errors."""

    exit_code = 4


class StructuralError(EngineError):
    """A precondition or type invariant was violated (bad shapes, bad values)."""

    exit_code = 4


class SchemaError(EngineError):
    """A file failed schema validation. Carries a JSON-pointer location."""

    exit_code = 4

    def __init__(self, message, pointer=""):
        super().__init__(f"{message} (at {pointer or '/'})")
        self.pointer = pointer or "/"
        self.message = message


class DegenerateGraphError(EngineError):
    """Pruning removed every node: the sequence has no sustainable cycle."""

    exit_code = 2


class InfeasibleQueryError(EngineError):
    """No path satisfies the query constraints.

    ``detail`` holds machine-readable context: the first infeasible step for
    sequence searches, or the requested/achievable hop ranges for keyframe
    segments.
    """

    exit_code = 3

    def __init__(self, message, detail=None):
        super().__init__(message)
        self.detail = detail or {}
