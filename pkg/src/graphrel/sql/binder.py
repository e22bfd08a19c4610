"""Name resolution and static checks.

The binder turns parsed expressions into bound nodes whose references point at
a FROM item (by scope id and item index) and a concrete field: a column
position or one of the built-in names (``id``, ``fanin``, ``fanout``,
``from``, ``to``). Path references become :class:`PathElem` or
:class:`PathProp` nodes that the executor evaluates against a PathValue.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Union

from ..errors import BindError, CatalogError, PlanError
from ..graphview import GraphShape
from ..storage import Catalog, ColumnType, Table
from . import ast
from .printer import to_sql

_TYPE_TAGS = {
    ColumnType.INTEGER: "int",
    ColumnType.FLOAT: "float",
    ColumnType.TEXT: "text",
    ColumnType.BOOLEAN: "bool",
}


def _family(tag):
    return "num" if tag in ("int", "float") else tag


def literal_type(value):
    if value is None:
        return None
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, int):
        return "int"
    if isinstance(value, float):
        return "float"
    return "text"


# -- bound expression nodes ----------------------------------------------------


@dataclass(frozen=True)
class BLit:
    value: object
    type: str | None = None


@dataclass(frozen=True)
class Col:
    """A column or built-in of a table, vertex or edge item."""
    scope: int
    item: int
    kind: str  # table | vertex | edge
    field: Union[int, str]
    table: Table = field(compare=False, repr=False)
    type: str | None = None
    label: str = ""


@dataclass(frozen=True)
class PathProp:
    scope: int
    item: int
    prop: str  # length | pathstring | path
    type: str = "int"


@dataclass(frozen=True)
class PathElem:
    """``Edges[...]``/``Vertexes[...]``/``StartVertex``/``EndVertex`` access.

    ``coll`` is ``edges``, ``vertexes``, ``start`` or ``end``. For edges,
    ``sub`` selects the traversal-ordered start or end vertex of each edge, in
    which case ``field`` is a vertex field. ``index`` None means the whole
    collection.
    """

    scope: int
    item: int
    coll: str
    index: object
    sub: str | None
    field: Union[int, str]
    table: Table = field(compare=False, repr=False)
    type: str | None = None

    @property
    def vertex_valued(self) -> bool:
        return self.coll != "edges" or self.sub is not None

    @property
    def multi(self) -> bool:
        return self.coll in ("edges", "vertexes") and not isinstance(self.index, ast.Single)


@dataclass(frozen=True)
class BCmp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class BIn:
    operand: object
    items: tuple
    negated: bool = False


@dataclass(frozen=True)
class BInSub:
    operand: object
    query: "BoundSelect" = field(compare=False)
    negated: bool = False


@dataclass(frozen=True)
class BAnd:
    left: object
    right: object


@dataclass(frozen=True)
class BOr:
    left: object
    right: object


@dataclass(frozen=True)
class BNot:
    operand: object


@dataclass(frozen=True)
class PathAgg:
    func: str
    elem: PathElem
    type: str | None = None


@dataclass(frozen=True)
class RelAgg:
    func: str
    arg: object  # None for COUNT(*)
    type: str | None = None


# -- scopes and FROM items -----------------------------------------------------------

_scope_ids = itertools.count(1)


@dataclass(eq=False)
class TempSpec:
    definition: ast.GraphViewDef
    vertex_scope: "Scope"
    edge_scope: "Scope"
    vertex_filter: object
    edge_filter: object

    @property
    def outer_refs(self) -> set:
        return self.vertex_scope.outer_refs | self.edge_scope.outer_refs


@dataclass(eq=False)
class Item:
    index: int
    alias: str
    kind: str  # table | vertexes | edges | paths
    table: Table | None = None
    view: object = None  # registered GraphView
    shape: GraphShape | None = None
    weight: int | None = None  # edge column of a SHORTESTPATH hint
    weight_name: str | None = None
    temp: TempSpec | None = None
    source: object = None

    @property
    def is_path(self) -> bool:
        return self.kind == "paths"

    def describe(self) -> str:
        if self.kind == "table":
            name = self.table.name
            return name if self.alias.lower() == name.lower() else f"{name} AS {self.alias}"
        owner = "TEMPGRAPH" if self.temp is not None else self.shape.name
        return f"{owner} AS {self.alias}"


class Scope:
    def __init__(self, items: list[Item], parent: "Scope | None" = None):
        self.id = next(_scope_ids)
        self.items = items
        self.parent = parent
        # (scope id, item index) pairs referenced from ancestor scopes
        self.outer_refs: set[tuple[int, int]] = set()

    def find_alias(self, name: str) -> Item | None:
        key = name.lower()
        for item in self.items:
            if item.alias.lower() == key:
                return item
        return None


@dataclass(frozen=True)
class Conjunct:
    expr: ast.Expr
    bound: object

    @property
    def text(self) -> str:
        return to_sql(self.expr)


@dataclass(eq=False)
class OutputColumn:
    label: str
    expr: object


@dataclass(eq=False)
class BoundSelect:
    scope: Scope
    items: list[Item]
    conjuncts: list[Conjunct]
    outputs: list[OutputColumn]
    top: int | None
    limit: int | None
    aggregate: bool
    source: ast.Select


# -- reference utilities ------------------------------------------------------------


def children(node) -> tuple:
    if isinstance(node, BCmp):
        return (node.left, node.right)
    if isinstance(node, BIn):
        return (node.operand,) + node.items
    if isinstance(node, BInSub):
        return (node.operand,)
    if isinstance(node, (BAnd, BOr)):
        return (node.left, node.right)
    if isinstance(node, BNot):
        return (node.operand,)
    if isinstance(node, PathAgg):
        return (node.elem,)
    if isinstance(node, RelAgg):
        return () if node.arg is None else (node.arg,)
    return ()


def walk(node):
    yield node
    for child in children(node):
        yield from walk(child)


def item_refs(node, scope_id: int | None = None) -> set[tuple[int, int]]:
    """(scope, item) pairs referenced by ``node``; subqueries add their outer refs."""
    out = set()
    for n in walk(node):
        if isinstance(n, (Col, PathProp, PathElem)):
            out.add((n.scope, n.item))
        elif isinstance(n, BInSub):
            out |= n.query.scope.outer_refs
    if scope_id is not None:
        out = {r for r in out if r[0] == scope_id}
    return out


def static_type(node):
    if isinstance(node, (BLit, Col, PathProp, PathElem, PathAgg, RelAgg)):
        return node.type
    return "bool"


# -- binder ----------------------------------------------------------------------------


class Binder:
    def __init__(self, catalog: Catalog):
        self.catalog = catalog

    # statements

    def bind_select(self, select: ast.Select, parent: Scope | None = None) -> BoundSelect:
        items: list[Item] = []
        scope = Scope(items, parent)
        for i, src in enumerate(select.from_items):
            item = self._from_item(i, src, scope)
            if scope.find_alias(item.alias) is not None:
                raise BindError(f"duplicate alias {item.alias!r} in FROM")
            items.append(item)
        conjuncts = []
        for expr in ast.conjuncts(select.where):
            bound = self.expr(expr, scope)
            self._require_predicate(bound, expr)
            conjuncts.append(Conjunct(expr, bound))
        outputs: list[OutputColumn] = []
        if not select.items:
            outputs = self._star(scope)
        else:
            for sel in select.items:
                bound = self.expr(sel.expr, scope, allow_rel_agg=True)
                label = sel.alias or _label(sel.expr)
                if sel.alias is None and isinstance(bound, PathProp) and bound.prop == "path":
                    label = "PathString"
                outputs.append(OutputColumn(label, bound))
        aggregate = any(isinstance(o.expr, RelAgg) for o in outputs)
        if aggregate:
            for o in outputs:
                if not isinstance(o.expr, (RelAgg, BLit)):
                    raise BindError(
                        f"{o.label} must be an aggregate: there is no grouping"
                    )
        return BoundSelect(scope, items, conjuncts, outputs, select.top, select.limit, aggregate, select)

    def _star(self, scope: Scope) -> list[OutputColumn]:
        out = []
        for it in scope.items:
            if it.kind == "table":
                for pos, col in enumerate(it.table.schema.columns):
                    out.append(OutputColumn(col.name, Col(scope.id, it.index, "table", pos, it.table,
                                                          _TYPE_TAGS[col.type], col.name)))
            elif it.kind == "vertexes":
                t = it.shape.vertex_table
                out.append(OutputColumn("Id", Col(scope.id, it.index, "vertex", "id", t, "int", "Id")))
                for name, pos in it.shape.declared_vertex_attributes():
                    out.append(OutputColumn(name, Col(scope.id, it.index, "vertex", pos, t,
                                                      _TYPE_TAGS[t.schema.columns[pos].type], name)))
                out.append(OutputColumn("FanIn", Col(scope.id, it.index, "vertex", "fanin", t, "int")))
                out.append(OutputColumn("FanOut", Col(scope.id, it.index, "vertex", "fanout", t, "int")))
            elif it.kind == "edges":
                t = it.shape.edge_table
                for name, fld in (("Id", "id"), ("From", "from"), ("To", "to")):
                    out.append(OutputColumn(name, Col(scope.id, it.index, "edge", fld, t, "int", name)))
                for name, pos in it.shape.declared_edge_attributes():
                    out.append(OutputColumn(name, Col(scope.id, it.index, "edge", pos, t,
                                                      _TYPE_TAGS[t.schema.columns[pos].type], name)))
            else:
                out.append(OutputColumn("PathString", PathProp(scope.id, it.index, "path", "text")))
        return out

    def _from_item(self, index: int, src, scope: Scope) -> Item:
        try:
            if isinstance(src, ast.TableRef):
                if self.catalog.has_graph_view(src.name) and not self.catalog.has_table(src.name):
                    raise BindError(f"graph view {src.name} must be used as .PATHS, .VERTEXES or .EDGES")
                table = self.catalog.table(src.name)
                return Item(index, src.alias or table.name, "table", table=table, source=src)
            if isinstance(src, ast.GraphRef):
                view = self.catalog.graph_view(src.view)
                item = Item(index, src.alias, src.kind.lower(), view=view, shape=view, source=src)
                self._hint(item, src.hint)
                return item
        except CatalogError as exc:
            raise BindError(str(exc)) from None
        return self._temp_item(index, src, scope)

    def _temp_item(self, index: int, src: ast.TempGraphRef, scope: Scope) -> Item:
        definition = ast.GraphViewDef("TEMPGRAPH", src.directed, src.vertexes, src.edges)
        try:
            shape = GraphShape(definition, self.catalog)
        except CatalogError as exc:
            raise BindError(str(exc)) from None
        vscope, vfilter = self.source_filter(src.vertexes, parent=scope)
        escope, efilter = self.source_filter(src.edges, parent=scope)
        item = Item(index, src.alias, "paths", shape=shape, source=src,
                    temp=TempSpec(definition, vscope, escope, vfilter, efilter))
        self._hint(item, src.hint)
        return item

    def _hint(self, item: Item, hint) -> None:
        if hint is None:
            return
        pos = item.shape.edge_attribute(hint.attribute)
        if pos is None:
            raise BindError(f"unknown edge attribute {hint.attribute!r} in SHORTESTPATH hint")
        ctype = item.shape.edge_table.schema.columns[pos].type
        if ctype not in (ColumnType.INTEGER, ColumnType.FLOAT):
            raise PlanError(f"SHORTESTPATH attribute {hint.attribute} is not numeric")
        item.weight = pos
        item.weight_name = hint.attribute

    def source_filter(self, spec: ast.SourceSpec, parent: Scope | None = None):
        """Bind a graph source's WHERE clause against that source table."""
        table = self._table(spec.table)
        scope = Scope([Item(0, table.name, "table", table=table)], parent)
        if spec.where is None:
            return scope, None
        bound = self.expr(spec.where, scope)
        self._require_predicate(bound, spec.where)
        return scope, bound

    def table_scope(self, name: str) -> Scope:
        table = self._table(name)
        return Scope([Item(0, table.name, "table", table=table)])

    def _table(self, name: str) -> Table:
        try:
            return self.catalog.table(name)
        except CatalogError as exc:
            raise BindError(str(exc)) from None

    @staticmethod
    def _require_predicate(bound, expr) -> None:
        if static_type(bound) not in ("bool", None):
            raise BindError(f"{to_sql(expr)} is not a condition")

    # expressions

    def expr(self, node, scope: Scope, allow_rel_agg: bool = False, in_agg: bool = False):
        if isinstance(node, ast.Literal):
            return BLit(node.value, literal_type(node.value))
        if isinstance(node, ast.Ref):
            bound = self.ref(node, scope)
            if isinstance(bound, PathElem) and bound.multi:
                raise BindError(
                    f"{to_sql(node)} is a collection: compare it or aggregate it"
                )
            return bound
        if isinstance(node, ast.Compare):
            left = self.operand(node.left, scope)
            right = self.operand(node.right, scope)
            self._check_comparable(left, right, node)
            return BCmp(node.op, left, right)
        if isinstance(node, ast.InList):
            operand = self.operand(node.operand, scope)
            items = tuple(self.expr(i, scope) for i in node.items)
            for it in items:
                self._check_comparable(operand, it, node)
            return BIn(operand, items, node.negated)
        if isinstance(node, ast.InSelect):
            operand = self.operand(node.operand, scope)
            query = self.bind_select(node.query, parent=scope)
            if len(query.outputs) != 1:
                raise BindError("an IN subquery must select exactly one column")
            self._check_comparable(operand, query.outputs[0].expr, node)
            return BInSub(operand, query, node.negated)
        if isinstance(node, ast.And):
            return BAnd(self._cond(node.left, scope), self._cond(node.right, scope))
        if isinstance(node, ast.Or):
            return BOr(self._cond(node.left, scope), self._cond(node.right, scope))
        if isinstance(node, ast.Not):
            return BNot(self._cond(node.operand, scope))
        if isinstance(node, ast.Call):
            return self.call(node, scope, allow_rel_agg, in_agg)
        if isinstance(node, ast.Star):
            raise BindError("* is only valid inside COUNT(*)")
        raise BindError(f"unsupported expression {node!r}")

    def _cond(self, node, scope):
        bound = self.expr(node, scope)
        self._require_predicate(bound, node)
        return bound

    def operand(self, node, scope: Scope):
        """Comparison operands may be collections (quantified comparisons)."""
        if isinstance(node, ast.Ref):
            return self.ref(node, scope)
        return self.expr(node, scope)

    def _check_comparable(self, left, right, node) -> None:
        a, b = static_type(left), static_type(right)
        if a is None or b is None:
            return
        if _family(a) != _family(b):
            raise BindError(f"cannot compare {a} with {b} in {to_sql(node)}")

    def call(self, node: ast.Call, scope: Scope, allow_rel_agg: bool, in_agg: bool):
        if in_agg:
            raise BindError("aggregate calls cannot be nested")
        func = node.name
        (arg,) = node.args
        if isinstance(arg, ast.Star):
            if not allow_rel_agg:
                raise BindError("COUNT(*) is only valid in the SELECT list")
            return RelAgg("COUNT", None, "int")
        if isinstance(arg, ast.Ref):
            if len(arg.parts) == 1 and arg.parts[0].index is None:
                item = _lookup_alias(scope, arg.parts[0].name)
                if item is not None and item[1].kind != "paths" and func == "COUNT":
                    if not allow_rel_agg:
                        raise BindError("COUNT over a FROM item is only valid in the SELECT list")
                    return RelAgg("COUNT", None, "int")
            bound = self.ref(arg, scope)
        else:
            bound = self.expr(arg, scope, in_agg=True)
        if isinstance(bound, PathElem) and bound.multi:
            if func in ("SUM", "AVG") and bound.type not in ("int", "float", None):
                raise BindError(f"{func} needs a numeric attribute")
            rtype = "int" if func == "COUNT" else ("float" if func == "AVG" else bound.type)
            return PathAgg(func, bound, rtype)
        if not allow_rel_agg:
            raise BindError(f"{func}({to_sql(arg)}) needs a path collection argument here")
        if isinstance(bound, PathProp) and bound.prop == "path":
            if func != "COUNT":
                raise BindError(f"{func} cannot aggregate whole paths")
            return RelAgg("COUNT", None, "int")
        btype = static_type(bound)
        if func in ("SUM", "AVG") and btype not in ("int", "float", None):
            raise BindError(f"{func} needs a numeric argument")
        rtype = "int" if func == "COUNT" else ("float" if func == "AVG" else btype)
        return RelAgg(func, bound, rtype)

    # references

    def ref(self, node: ast.Ref, scope: Scope):
        parts = node.parts
        head = parts[0]
        if len(parts) == 1:
            if head.index is not None:
                raise BindError(f"unexpected index on {head.name}")
            found = _lookup_alias(scope, head.name)
            if found is not None:
                sc, item = found
                self._note_outer(scope, sc, item)
                if item.kind == "paths":
                    return PathProp(sc.id, item.index, "path", "text")
                raise BindError(f"{head.name} names a FROM item, not a value")
            return self._unqualified(head.name, scope)
        found = _lookup_alias(scope, head.name)
        if found is None:
            raise BindError(f"unknown table or alias {head.name!r}")
        if head.index is not None:
            raise BindError(f"unexpected index on {head.name}")
        sc, item = found
        self._note_outer(scope, sc, item)
        if item.kind == "paths":
            return self._path_ref(node, sc, item)
        if len(parts) != 2 or parts[1].index is not None:
            raise BindError(f"cannot resolve {to_sql(node)}")
        col = self._item_field(sc, item, parts[1].name)
        if col is None:
            raise BindError(f"unknown column {parts[1].name!r} of {item.alias}")
        return col

    def _note_outer(self, scope: Scope, found: Scope, item: Item) -> None:
        s = scope
        while s is not None and s is not found:
            s.outer_refs.add((found.id, item.index))
            s = s.parent

    def _unqualified(self, name: str, scope: Scope):
        s = scope
        while s is not None:
            hits = [c for it in s.items if (c := self._item_field(s, it, name)) is not None]
            if len(hits) > 1:
                raise BindError(f"ambiguous column {name!r}")
            if hits:
                self._note_outer(scope, s, s.items[hits[0].item])
                return hits[0]
            s = s.parent
        raise BindError(f"unknown column {name!r}")

    def _item_field(self, scope: Scope, item: Item, name: str) -> Col | None:
        key = name.lower()
        if item.kind == "table":
            pos = item.table.schema.find(name)
            if pos is None:
                return None
            return Col(scope.id, item.index, "table", pos, item.table,
                       _TYPE_TAGS[item.table.schema.columns[pos].type], name)
        if item.kind == "vertexes":
            table = item.shape.vertex_table
            if key in ("fanin", "fanout"):
                return Col(scope.id, item.index, "vertex", key, table, "int", name)
            if key == "id":
                return Col(scope.id, item.index, "vertex", "id", table, "int", name)
            pos = item.shape.vertex_attribute(name)
            if pos is None:
                return None
            return Col(scope.id, item.index, "vertex", pos, table,
                       _TYPE_TAGS[table.schema.columns[pos].type], name)
        if item.kind == "edges":
            table = item.shape.edge_table
            if key in ("id", "from", "to"):
                return Col(scope.id, item.index, "edge", key, table, "int", name)
            pos = item.shape.edge_attribute(name)
            if pos is None:
                return None
            return Col(scope.id, item.index, "edge", pos, table,
                       _TYPE_TAGS[table.schema.columns[pos].type], name)
        return None

    def _vertex_field(self, shape: GraphShape, name: str):
        key = name.lower()
        if key in ("id", "fanin", "fanout"):
            return key, "int"
        pos = shape.vertex_attribute(name)
        if pos is None:
            raise BindError(f"unknown vertex attribute {name!r}")
        return pos, _TYPE_TAGS[shape.vertex_table.schema.columns[pos].type]

    def _edge_field(self, shape: GraphShape, name: str):
        key = name.lower()
        if key in ("id", "from", "to"):
            return key, "int"
        pos = shape.edge_attribute(name)
        if pos is None:
            raise BindError(f"unknown edge attribute {name!r}")
        return pos, _TYPE_TAGS[shape.edge_table.schema.columns[pos].type]

    def _path_ref(self, node: ast.Ref, scope: Scope, item: Item):
        shape = item.shape
        parts = node.parts[1:]
        comp = parts[0]
        key = comp.name.lower()
        rest = parts[1:]
        text = to_sql(node)

        def no_index(part):
            if part.index is not None:
                raise BindError(f"unexpected index in {text}")

        if key in ("length", "pathstring"):
            no_index(comp)
            if rest:
                raise BindError(f"cannot resolve {text}")
            return PathProp(scope.id, item.index, key, "int" if key == "length" else "text")
        if key in ("startvertexid", "endvertexid"):
            no_index(comp)
            if rest:
                raise BindError(f"cannot resolve {text}")
            coll = "start" if key == "startvertexid" else "end"
            return PathElem(scope.id, item.index, coll, None, None, "id", shape.vertex_table, "int")
        if key in ("startvertex", "endvertex"):
            no_index(comp)
            coll = "start" if key == "startvertex" else "end"
            fld, ftype = ("id", "int")
            if rest:
                if len(rest) > 1:
                    raise BindError(f"cannot resolve {text}")
                no_index(rest[0])
                fld, ftype = self._vertex_field(shape, rest[0].name)
            return PathElem(scope.id, item.index, coll, None, None, fld, shape.vertex_table, ftype)
        if key == "vertexes":
            fld, ftype = ("id", "int")
            if rest:
                if len(rest) > 1:
                    raise BindError(f"cannot resolve {text}")
                no_index(rest[0])
                fld, ftype = self._vertex_field(shape, rest[0].name)
            return PathElem(scope.id, item.index, "vertexes", comp.index, None, fld,
                            shape.vertex_table, ftype)
        if key == "edges":
            if not rest:
                return PathElem(scope.id, item.index, "edges", comp.index, None, "id",
                                shape.edge_table, "int")
            no_index(rest[0])
            sub_key = rest[0].name.lower()
            if sub_key in ("startvertex", "endvertex"):
                sub = "start" if sub_key == "startvertex" else "end"
                fld, ftype = ("id", "int")
                if len(rest) > 2:
                    raise BindError(f"cannot resolve {text}")
                if len(rest) == 2:
                    no_index(rest[1])
                    fld, ftype = self._vertex_field(shape, rest[1].name)
                return PathElem(scope.id, item.index, "edges", comp.index, sub, fld,
                                shape.vertex_table, ftype)
            if len(rest) > 1:
                raise BindError(f"cannot resolve {text}")
            fld, ftype = self._edge_field(shape, rest[0].name)
            return PathElem(scope.id, item.index, "edges", comp.index, None, fld,
                            shape.edge_table, ftype)
        raise BindError(f"unknown path component {comp.name!r} in {text}")


def _lookup_alias(scope: Scope, name: str):
    s = scope
    while s is not None:
        item = s.find_alias(name)
        if item is not None:
            return s, item
        s = s.parent
    return None


def _label(expr) -> str:
    if isinstance(expr, ast.Ref):
        last = expr.parts[-1]
        if last.index is None:
            return last.name
    return to_sql(expr)


def bind(statement, catalog: Catalog):
    """Bind a SELECT (or EXPLAIN SELECT) against ``catalog``."""
    if isinstance(statement, ast.Explain):
        statement = statement.query
    if not isinstance(statement, ast.Select):
        raise BindError("only SELECT statements are bound for planning")
    return Binder(catalog).bind_select(statement)
