"""Exception hierarchy shared across the audit harness.

Exit-code mapping in the CLI: every ``AuditError`` is an input/usage problem
(exit 2); protocol overclaims are signalled by the compliance report itself
(exit 1), not by exceptions.
"""


class AuditError(Exception):
    """Base class for all harness errors."""


class ParseError(AuditError):
    """An input file could not be parsed (carries file/line context)."""


class ValidationError(AuditError):
    """Parsed input violates a documented invariant."""


class ContractError(AuditError):
    """A function was called with arguments outside its contract."""
