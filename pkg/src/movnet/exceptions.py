"""Exception hierarchy shared by all movnet modules."""


class MovnetError(Exception):
    """Base class for every error raised by this package."""


class ZeroOutDegree(MovnetError, ValueError):
    def __init__(self, node):
        self.node = int(node)
        super().__init__(f"node {self.node} has zero out-degree; random walk undefined")


class NotStronglyConnected(MovnetError, ValueError):
    pass


class NotConverged(MovnetError, RuntimeError):
    pass


class SingularSystem(MovnetError, ValueError):
    pass


class Degenerate(MovnetError, ValueError):
    pass


class ModeMismatch(MovnetError, ValueError):
    pass


class ShapeMismatch(MovnetError, ValueError):
    pass


class DimensionMismatch(MovnetError, ValueError):
    pass


class AssumptionViolated(MovnetError):
    """A modelling assumption failed and no override flag was set.

    ``which`` names the assumption (``"assumption-1"``, ``"assumption-2"``,
    ``"epsilon"``) so callers can map it to an exit status.
    """

    def __init__(self, which, detail=""):
        self.which = which
        self.detail = detail
        msg = which if not detail else f"{which}: {detail}"
        super().__init__(msg)


class InsufficientSamples(MovnetError, ValueError):
    pass


class ConfigError(MovnetError, ValueError):
    """Malformed experiment configuration; ``field`` points at the offending key."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class TrialError(MovnetError):
    def __init__(self, index, cause):
        self.index = index
        self.cause = cause
        super().__init__(f"trial {index} failed: {cause!r}")


class InvalidStepSize(MovnetError, ValueError):
    pass
