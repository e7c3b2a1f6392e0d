"""Error taxonomy shared across the workbench.

Every failure that callers are expected to handle derives from
:class:`WorkbenchError`.  The HTTP layer maps these onto structured error
payloads; library users can catch the base class.
"""
from __future__ import annotations


class WorkbenchError(Exception):
    """Base class for all recoverable workbench failures."""

    code = "error"

    def __init__(self, message: str, detail: object = None):
        super().__init__(message)
        self.message = message
        self.detail = detail


class ParseError(WorkbenchError):
    """Malformed input document (XML, JSON, CSV)."""

    code = "parse_error"


class ValidationError(WorkbenchError):
    """Input violates a documented precondition."""

    code = "validation_error"


class SchemaMismatchError(ValidationError):
    """Feature matrix does not line up with the schema a model was trained on."""

    code = "schema_mismatch"


class NotFoundError(WorkbenchError):
    """Referenced entity does not exist in the store."""

    code = "not_found"


class UnsupportedError(WorkbenchError):
    """Operation is defined but not available for this configuration."""

    code = "unsupported"
