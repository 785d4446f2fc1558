"""Exception types shared across the workbench."""


class SpeError(Exception):
    """Base class for all workbench errors."""


class ParseError(SpeError):
    """Input document is not syntactically valid."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class SchemaError(SpeError):
    """Document parsed but does not match the expected schema."""

    def __init__(self, message: str, path: str = "/"):
        self.path = path
        super().__init__(f"{path}: {message}")


class InvalidModelError(SpeError):
    """Model violates structural invariants; carries the validation report."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(f"{v.code} at {v.path}" for v in self.violations)
        super().__init__(f"model is invalid: {lines}")


class MissingDemandError(SpeError):
    """A scenario invokes an operation that has no demand annotation."""


class NoClientComponentError(SpeError):
    """No unique client component (empty `provided`, originates messages)."""


class FrozenElementError(SpeError):
    """Refactoring targets a component protected by a legacy constraint."""


class BadProbabilitiesError(SpeError):
    """Probabilities out of (0,1] or not summing to one."""


class BackwardUnsupportedEditError(SpeError):
    """QN-side edit has no preimage in the software metamodel."""


class NothingToBatchError(SpeError):
    """Facade refactoring needs at least two messages to batch."""


class RefactoringError(SpeError):
    """Refactoring parameters are inconsistent with the model."""


class BudgetExceededError(SpeError):
    """Exact MVA population lattice exceeds the configured budget."""


class UnknownNodeError(SpeError):
    """Session operation addressed a node id that does not exist."""


class EmptyLedgerError(SpeError):
    """Cost ledger lacks timing samples for a used path."""
