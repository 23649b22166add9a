class QLambdaError(Exception):
    """Base class for every error raised by this package."""


class ParseError(QLambdaError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} at line {line}, column {column}"
        super().__init__(message)


class LabelError(QLambdaError):
    """Two bit constants share a label."""


class SubstitutionError(QLambdaError):
    pass


class TypeCheckError(QLambdaError):
    pass


class LinearityError(TypeCheckError):
    """A variable is used zero times or more than once."""


class RegisterError(QLambdaError, ValueError):
    """Bad register, target list, permutation or gate matrix."""


class MachineError(QLambdaError):
    """Invariant violation inside the token machine.

    The machine is proven deadlock-free and terminating, so these always
    indicate a bug rather than a bad input.
    """


class DeadlockError(MachineError):
    pass


class BudgetExceededError(MachineError):
    pass


class MachineInputError(QLambdaError, ValueError):
    """The machine was started on an open derivation or a register of the wrong size."""
