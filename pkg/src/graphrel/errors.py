"""Exception hierarchy shared by every layer of the engine."""


class EngineError(Exception):
    """Base class for all errors raised by graphrel."""


class CatalogError(EngineError):
    """Unknown or duplicate table, graph view, column or attribute."""


class ConstraintError(EngineError):
    """A mutation would break a schema, type or uniqueness rule."""


class CsvLoadError(EngineError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ParseError(EngineError):
    """Syntax error with a 1-based position and the offending token text."""

    def __init__(self, message, line=1, column=1, token=None):
        self.line = line
        self.column = column
        self.token = token
        where = f"line {line}, column {column}"
        if token is not None:
            where += f" near {token!r}"
        super().__init__(f"{message} ({where})")
        self.bare_message = message


class BindError(EngineError):
    """Name resolution failed while binding a statement to the catalog."""


class PlanError(EngineError):
    pass


class QueryError(EngineError):
    """Raised while a plan is executing (type errors, negative weights, ...)."""
