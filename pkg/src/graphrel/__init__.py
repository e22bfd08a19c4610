"""In-memory relational engine with graph views and path queries."""

from .engine import Database, Result, ScriptError
from .errors import (
    BindError, CatalogError, ConstraintError, CsvLoadError, EngineError, ParseError, PlanError,
    QueryError,
)
from .graphview import GraphView, PathValue, build, path_string
from .planner import PlannerOptions
from .storage import Catalog, Schema, Table, TupleLocator

__all__ = [
    "BindError", "Catalog", "CatalogError", "ConstraintError", "CsvLoadError", "Database",
    "EngineError", "GraphView", "ParseError", "PathValue", "PlanError", "PlannerOptions",
    "QueryError", "Result", "Schema", "ScriptError", "Table", "TupleLocator", "build",
    "path_string",
]
