"""Semantic exception hierarchy.

Exit-code mapping used by the CLI: DomainError / ValidationError -> 2,
BudgetError -> 3, InternalInvariantError -> 4.
"""


class VCKitError(Exception):
    """Base class for all vckit errors."""


class DomainError(VCKitError):
    """Input outside an operation's domain (bad ids, bad measure, bad config)."""


class SizeGuardError(DomainError):
    """A combinatorial size guard was exceeded (e.g. 2^|D| blowup protection)."""


class BudgetError(VCKitError):
    """A declared search budget was exhausted before the search finished."""

    def __init__(self, message, best_known=None):
        super().__init__(message)
        self.best_known = best_known


class ValidationError(DomainError):
    """An instance file or report failed schema/consistency validation."""


class InternalInvariantError(VCKitError):
    """A result violated an invariant the library asserts on its own output."""
