"""Abstract syntax tree for the SQL dialect.

Nodes are frozen dataclasses holding tuples, so structurally equal trees
compare equal; the round-trip tests rely on that.

Dotted names are kept unresolved (:class:`Ref`) until binding, because only
the catalog knows whether ``PS.Length`` names a path property or a column of
a table aliased ``PS``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union


# -- expressions ---------------------------------------------------------------


@dataclass(frozen=True)
class Literal:
    value: object


@dataclass(frozen=True)
class Single:
    """``[i]``"""
    position: int


@dataclass(frozen=True)
class Range:
    """``[lo..hi]``; ``hi`` is None for the open form ``[lo..*]``."""
    lo: int
    hi: int | None


@dataclass(frozen=True)
class AnyIndex:
    """``[ANY]``"""


Index = Union[Single, Range, AnyIndex]


@dataclass(frozen=True)
class RefPart:
    name: str
    index: Index | None = None


@dataclass(frozen=True)
class Ref:
    """A dotted name such as ``U.uId`` or ``PS.Edges[0..*].StartDate``."""
    parts: tuple[RefPart, ...]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.parts)


@dataclass(frozen=True)
class Star:
    """``*`` inside ``COUNT(*)``."""


@dataclass(frozen=True)
class Compare:
    op: str  # one of = <> < <= > >=
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class InList:
    operand: "Expr"
    items: tuple["Expr", ...]
    negated: bool = False


@dataclass(frozen=True)
class InSelect:
    operand: "Expr"
    query: "Select"
    negated: bool = False


@dataclass(frozen=True)
class And:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Or:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Not:
    operand: "Expr"


@dataclass(frozen=True)
class Call:
    name: str  # upper-cased function name
    args: tuple["Expr", ...]


Expr = Union[Literal, Ref, Star, Compare, InList, InSelect, And, Or, Not, Call]

AGGREGATES = frozenset({"SUM", "COUNT", "MIN", "MAX", "AVG"})


# -- graph view definitions ------------------------------------------------------


@dataclass(frozen=True)
class SourceSpec:
    """One side (vertexes or edges) of a graph view definition.

    ``attrs`` holds ``(alias, column)`` pairs in declaration order. ``from_col``
    and ``to_col`` are only set for the edges side.
    """

    table: str
    id_col: str
    attrs: tuple[tuple[str, str], ...] = ()
    from_col: str | None = None
    to_col: str | None = None
    where: Expr | None = None


@dataclass(frozen=True)
class GraphViewDef:
    name: str
    directed: bool
    vertexes: SourceSpec
    edges: SourceSpec


# -- FROM items -------------------------------------------------------------------


@dataclass(frozen=True)
class ShortestPathHint:
    attribute: str


@dataclass(frozen=True)
class TableRef:
    name: str
    alias: str | None = None


@dataclass(frozen=True)
class GraphRef:
    view: str
    kind: str  # PATHS | VERTEXES | EDGES
    alias: str | None = None
    hint: ShortestPathHint | None = None


@dataclass(frozen=True)
class TempGraphRef:
    vertexes: SourceSpec
    edges: SourceSpec
    alias: str | None = None
    hint: ShortestPathHint | None = None
    directed: bool = True


FromItem = Union[TableRef, GraphRef, TempGraphRef]


# -- statements -------------------------------------------------------------------


@dataclass(frozen=True)
class SelectItem:
    expr: Expr
    alias: str | None = None


@dataclass(frozen=True)
class Select:
    items: tuple[SelectItem, ...]  # empty tuple means SELECT *
    from_items: tuple[FromItem, ...]
    where: Expr | None = None
    top: int | None = None
    limit: int | None = None


@dataclass(frozen=True)
class ColumnDef:
    name: str
    type: str


@dataclass(frozen=True)
class CreateTable:
    name: str
    columns: tuple[ColumnDef, ...]


@dataclass(frozen=True)
class CreateGraphView:
    definition: GraphViewDef


@dataclass(frozen=True)
class Insert:
    table: str
    columns: tuple[str, ...] | None
    rows: tuple[tuple[Expr, ...], ...]


@dataclass(frozen=True)
class Update:
    table: str
    assignments: tuple[tuple[str, Expr], ...]
    where: Expr | None = None


@dataclass(frozen=True)
class Delete:
    table: str
    where: Expr | None = None


@dataclass(frozen=True)
class Explain:
    query: Select


@dataclass(frozen=True)
class MetaCommand:
    """A shell directive such as ``.timing on``; never reaches the planner."""
    name: str
    args: tuple[str, ...] = field(default=())


Statement = Union[
    CreateTable, CreateGraphView, Insert, Update, Delete, Select, Explain, MetaCommand
]


def conjuncts(expr: Expr | None) -> list[Expr]:
    """Flatten a tree of ANDs into its conjunct list."""
    if expr is None:
        return []
    if isinstance(expr, And):
        return conjuncts(expr.left) + conjuncts(expr.right)
    return [expr]
