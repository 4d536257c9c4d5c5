"""Exception hierarchy; each family maps to one CLI exit code."""


class MahlerError(Exception):
    exit_code = 1


class ParseError(MahlerError, ValueError):
    """Malformed body file; ``path`` locates the offending JSON node."""

    exit_code = 2

    def __init__(self, message, path="$"):
        super().__init__(f"{path}: {message}")
        self.path = path


class GeometryError(MahlerError, ValueError):
    """Origin not interior, unbounded or degenerate bodies."""

    exit_code = 3


class InvarianceError(MahlerError, ValueError):
    exit_code = 4


class SolverError(MahlerError, RuntimeError):
    """A solver failed; ``diagnostics`` carries whatever was sampled."""

    exit_code = 5

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class PreconditionError(MahlerError, ValueError):
    exit_code = 5
