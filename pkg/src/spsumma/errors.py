class SparseError(Exception):
    pass


class BoundsError(SparseError, IndexError):
    pass


class DimensionError(SparseError, ValueError):
    pass


class ConfigurationError(SparseError, ValueError):
    pass


class ModelError(SparseError, ValueError):
    """Cost model asked about a configuration it does not describe."""


class DeadlockError(SparseError, RuntimeError):
    def __init__(self, blocked):
        self.blocked = dict(blocked)
        desc = ", ".join(f"P{r} waiting on {w}" for r, w in sorted(self.blocked.items()))
        super().__init__(f"deadlock: every live rank is blocked ({desc})")


class ParseError(SparseError, ValueError):
    def __init__(self, msg, lineno=None):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {msg}" if lineno is not None else msg)
