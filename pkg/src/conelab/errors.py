"""Shared exception types.

Everything raised on bad input derives from ValueError so callers that do
not care about the fine distinctions can catch one thing.
"""


class DomainError(ValueError):
    """An argument is outside the range the operation is defined for."""


class ContractError(ValueError):
    """A structural precondition (congruence, containment, support) fails."""


class BandwidthError(ValueError):
    """A multiplier or field needs frequencies the grid cannot represent."""


class SizingError(ValueError):
    """A requested grid would exceed the configured memory ceiling."""


class ReplacementError(ValueError):
    """A cutoff replacement does not agree with the original on the
    constrained frequency set."""
