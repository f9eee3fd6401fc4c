"""Exception types shared across the package."""


class ModelError(ValueError):
    """A model is malformed or inconsistent with another model."""


class AlphabetMismatch(ModelError):
    pass


class ModelParseError(ModelError):
    def __init__(self, message, line=None, column=None, source=None):
        self.line = line
        self.column = column
        self.source = source
        where = ":".join(str(p) for p in (source, line, column) if p is not None)
        super().__init__(f"{where}: {message}" if where else message)


class Unrealizable(Exception):
    """No system satisfies the qualitative specification almost surely."""


class MultichainError(Exception):
    """The unichain long-run formula does not apply to this chain."""

    def __init__(self, message, structure=None):
        super().__init__(message)
        self.structure = structure


class MultichainSuspect(MultichainError):
    """The synthesis MDP fails the cheap necessary check for being unichain."""


class NonConvergence(RuntimeError):
    pass


class InternalConsistencyError(RuntimeError):
    """Two independent computations of the same quantity disagree."""


class LpNumericalError(RuntimeError):
    def __init__(self, message, condition=None):
        self.condition = condition
        if condition is not None:
            message = f"{message} (basis condition number {condition:.3g})"
        super().__init__(message)
