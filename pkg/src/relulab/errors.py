"""Exception hierarchy shared across the package."""


class RelulabError(Exception):
    """Base class for all package errors."""


# --- network loading ---

class MissingCell(RelulabError):
    """A weight or bias cell required by the declared shape is absent."""


class DuplicateCell(RelulabError):
    """The same (layer, node) index appears more than once in a table."""


class IndexOutOfRange(RelulabError):
    """A table row references a node outside the declared layer sizes."""


# --- model building ---

class DuplicateName(RelulabError):
    """A variable or constraint name is already registered."""


class InvalidBounds(RelulabError):
    """Lower bound exceeds upper bound."""


class UnknownVariable(RelulabError):
    """An expression references a variable that was never declared."""


# --- encoders ---

class InfiniteInputBounds(RelulabError):
    """The big-M encoding needs a finite input interval."""


class NegativeWeightRejected(RelulabError):
    """The binary-free encoding requires every weight to be non-negative."""


# --- solvers ---

class NumericalBreakdown(RelulabError):
    """Pivoting stalled beyond the anti-cycling safeguards; rescale the model."""


# --- instance generation / oracles ---

class BudgetExceeded(RelulabError):
    """Exhaustive enumeration would exceed the configured budget."""
