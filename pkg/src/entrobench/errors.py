"""Error taxonomy shared by every module.

Three failure categories matter to callers: a value outside an operation's
domain, a malformed structure or document, and a computation that would
exceed its declared budget.  The CLI maps these onto distinct exit codes.
"""


class WorkbenchError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(WorkbenchError):
    """An argument lies outside the operation's domain."""


class ValidationError(WorkbenchError):
    """A structure, document, or schema is malformed."""


class ResourceError(WorkbenchError):
    """The computation would exceed its declared budget."""
