"""Compile bound expressions into Python closures over rows.

A row flowing between operators is a tuple with one entry per joined FROM
item: a stored tuple, a VertexRecord, an EdgeRecord or a PathValue. An
:class:`Env` tells the compiler where each referenced item lives: either in
the row argument (``layout``) or in a :class:`Cell` that an enclosing
operator fills in (outer references of probes, TEMPGRAPH filters and
subqueries).
"""

from __future__ import annotations

import operator
from dataclasses import dataclass, field
from typing import Callable

from ..errors import PlanError, QueryError
from ..graphview import path_string
from ..sql import ast
from ..sql.binder import (
    BAnd, BCmp, BIn, BInSub, BLit, BNot, BOr, Col, PathAgg, PathElem, PathProp, RelAgg,
)


class Cell:
    """Mutable slot holding the current row of an enclosing scope."""

    __slots__ = ("row",)

    def __init__(self):
        self.row = None


@dataclass
class Env:
    local: int
    layout: dict[int, int | None]
    cells: dict[int, tuple[Cell, dict[int, int | None]]] = field(default_factory=dict)
    # runs a bound subquery and returns its first column as a frozenset
    subquery: Callable | None = None

    def child(self, local: int, layout) -> "Env":
        return Env(local, layout, self.cells, self.subquery)


# -- comparison semantics ------------------------------------------------------------

_KINDS = {bool: "boolean", int: "number", float: "number", str: "text"}

_PY_OPS = {
    "=": operator.eq,
    "<>": operator.ne,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}


def comparison(op: str) -> Callable[[object, object], bool]:
    """Two-valued comparison: null compares false, mixed kinds are an error."""
    py = _PY_OPS[op]

    def test(a, b):
        if a is None or b is None:
            return False
        if type(a) is type(b):
            return py(a, b)
        ka, kb = _KINDS.get(type(a)), _KINDS.get(type(b))
        if ka != kb:
            raise QueryError(f"cannot compare {ka} value {a!r} with {kb} value {b!r}")
        return py(a, b)

    return test


def membership(values, negated: bool):
    """Test ``x IN values`` against a literal set."""
    values = [v for v in values if v is not None]
    kinds = {_KINDS.get(type(v)) for v in values}
    pool = frozenset(values)

    def test(x):
        if x is None:
            return False
        if kinds and _KINDS.get(type(x)) not in kinds:
            raise QueryError(f"cannot compare {_KINDS.get(type(x))} value {x!r} with {'/'.join(sorted(kinds))} list")
        return (x in pool) != negated

    return test


# -- path element access --------------------------------------------------------------


def elements_fn(elem: PathElem) -> Callable:
    """Path -> the element sequence addressed by ``elem`` (before indexing)."""
    if elem.coll == "edges":
        if elem.sub is None:
            return lambda p: p.edge_records
        if elem.sub == "start":
            return lambda p: p.vertexes[:-1]
        return lambda p: p.vertexes[1:]
    return lambda p: p.vertexes


def vertex_field_fn(elem) -> Callable:
    """(view, vertex id) -> field value."""
    fld = elem.field
    if fld == "id":
        return lambda view, vid: vid
    if fld == "fanin":
        return lambda view, vid: len(view.vertices[vid].in_edges)
    if fld == "fanout":
        return lambda view, vid: len(view.vertices[vid].out_edges)
    rows = elem.table._rows
    return lambda view, vid: rows[view.vertices[vid].slot][fld]


def edge_field_fn(elem) -> Callable:
    """(view, edge record) -> field value."""
    fld = elem.field
    if fld == "id":
        return lambda view, e: e.id
    if fld == "from":
        return lambda view, e: e.src
    if fld == "to":
        return lambda view, e: e.dst
    rows = elem.table._rows
    return lambda view, e: rows[e.slot][fld]


def element_field_fn(elem: PathElem) -> Callable:
    return vertex_field_fn(elem) if elem.vertex_valued else edge_field_fn(elem)


def path_scalar_fn(elem: PathElem) -> Callable:
    """Path -> value for single-valued references (None when out of range)."""
    get = element_field_fn(elem)
    if elem.coll == "start":
        return lambda p: get(p.view, p.start)
    if elem.coll == "end":
        return lambda p: get(p.view, p.end)
    seq = elements_fn(elem)
    i = elem.index.position

    def value(p):
        els = seq(p)
        if i >= len(els):
            return None
        return get(p.view, els[i])

    return value


def path_values_fn(elem: PathElem) -> Callable:
    """Path -> list of values for collection references, None for an invalid range.

    A bounded range needs its last position to exist and an open range needs
    its first; the whole collection behaves like ``[0..*]``.
    """
    get = element_field_fn(elem)
    seq = elements_fn(elem)
    index = elem.index
    if isinstance(index, ast.Range):
        lo, hi = index.lo, index.hi
        if hi is None:
            def values(p):
                els = seq(p)
                if lo >= len(els):
                    return None
                view = p.view
                return [get(view, e) for e in els[lo:]]
        else:
            def values(p):
                els = seq(p)
                if hi >= len(els):
                    return None
                view = p.view
                return [get(view, e) for e in els[lo:hi + 1]]
        return values

    def values(p):
        els = seq(p)
        if isinstance(index, ast.AnyIndex):
            view = p.view
            return [get(view, e) for e in els]
        if not els:
            return None
        view = p.view
        return [get(view, e) for e in els]

    return values


def quantifier(elem) -> str | None:
    if isinstance(elem, PathElem) and elem.multi:
        return "any" if isinstance(elem.index, ast.AnyIndex) else "all"
    return None


def fold(func: str, values):
    if values is None:
        return None
    vals = [v for v in values if v is not None]
    if func == "COUNT":
        return len(vals)
    if not vals:
        return None
    if func == "SUM":
        return sum(vals)
    if func == "MIN":
        return min(vals)
    if func == "MAX":
        return max(vals)
    return sum(vals) / len(vals)


# -- compiler -----------------------------------------------------------------------------


def _accessor(env: Env, scope: int, item: int):
    """Returns fn(row) -> item value, or None when the row *is* the item."""
    if scope == env.local:
        if item not in env.layout:
            raise PlanError("expression references a FROM item that is not available here")
        pos = env.layout[item]
        if pos is None:
            return None
        return operator.itemgetter(pos)
    if scope not in env.cells:
        raise PlanError("expression references an unavailable outer scope")
    cell, layout = env.cells[scope]
    if item not in layout:
        raise PlanError("outer reference to a FROM item that is not joined yet")
    pos = layout[item]
    if pos is None:
        return lambda row: cell.row
    return lambda row: cell.row[pos]


def _item_fn(env: Env, scope: int, item: int):
    acc = _accessor(env, scope, item)
    return (lambda row: row) if acc is None else acc


def compile_expr(node, env: Env) -> Callable:
    if isinstance(node, BLit):
        value = node.value
        return lambda row: value
    if isinstance(node, Col):
        return _compile_col(node, env)
    if isinstance(node, PathProp):
        get = _item_fn(env, node.scope, node.item)
        if node.prop == "length":
            return lambda row: get(row).length
        return lambda row: (lambda p: path_string(p.view, p))(get(row))
    if isinstance(node, PathElem):
        get = _item_fn(env, node.scope, node.item)
        if node.multi:
            raise PlanError("collection reference used as a scalar")
        scalar = path_scalar_fn(node)
        return lambda row: scalar(get(row))
    if isinstance(node, PathAgg):
        get = _item_fn(env, node.elem.scope, node.elem.item)
        values = path_values_fn(node.elem)
        func = node.func
        return lambda row: fold(func, values(get(row)))
    if isinstance(node, BCmp):
        return _compile_cmp(node, env)
    if isinstance(node, BIn):
        return _compile_in(node, env)
    if isinstance(node, BInSub):
        return _compile_in_sub(node, env)
    if isinstance(node, BAnd):
        a, b = compile_expr(node.left, env), compile_expr(node.right, env)
        return lambda row: bool(a(row)) and bool(b(row))
    if isinstance(node, BOr):
        a, b = compile_expr(node.left, env), compile_expr(node.right, env)
        return lambda row: bool(a(row)) or bool(b(row))
    if isinstance(node, BNot):
        a = compile_expr(node.operand, env)
        return lambda row: not a(row)
    if isinstance(node, RelAgg):
        raise PlanError("aggregate outside the SELECT list")
    raise PlanError(f"cannot compile {node!r}")


def _compile_col(node: Col, env: Env) -> Callable:
    acc = _accessor(env, node.scope, node.item)
    fld = node.field
    if node.kind == "table":
        if acc is None:
            return lambda row: row[fld]
        return lambda row: acc(row)[fld]
    get = (lambda row: row) if acc is None else acc
    if node.kind == "vertex":
        if fld == "id":
            return lambda row: get(row).id
        if fld == "fanin":
            return lambda row: len(get(row).in_edges)
        if fld == "fanout":
            return lambda row: len(get(row).out_edges)
    else:
        if fld == "id":
            return lambda row: get(row).id
        if fld == "from":
            return lambda row: get(row).src
        if fld == "to":
            return lambda row: get(row).dst
    rows = node.table._rows
    return lambda row: rows[get(row).slot][fld]


def compile_values(node, env: Env) -> Callable:
    """Compile a collection reference to fn(row) -> list or None."""
    get = _item_fn(env, node.scope, node.item)
    values = path_values_fn(node)
    return lambda row: values(get(row))


def _operand(node, env):
    q = quantifier(node)
    if q is None:
        return compile_expr(node, env), None
    return compile_values(node, env), q


def _compile_cmp(node: BCmp, env: Env) -> Callable:
    test = comparison(node.op)
    lf, lq = _operand(node.left, env)
    rf, rq = _operand(node.right, env)
    if lq is None and rq is None:
        return lambda row: test(lf(row), rf(row))
    lagg = all if lq == "all" else any
    ragg = all if rq == "all" else any

    def evaluate(row):
        a = lf(row)
        b = rf(row)
        if lq is not None and a is None:
            return False
        if rq is not None and b is None:
            return False
        if lq is None:
            return ragg(test(a, y) for y in b)
        if rq is None:
            return lagg(test(x, b) for x in a)
        return lagg(ragg(test(x, y) for y in b) for x in a)

    return evaluate


def _compile_in(node: BIn, env: Env) -> Callable:
    of, q = _operand(node.operand, env)
    if all(isinstance(i, BLit) for i in node.items):
        member = membership([i.value for i in node.items], node.negated)
    else:
        item_fns = [compile_expr(i, env) for i in node.items]
        eq = comparison("=")
        negated = node.negated

        def member_dyn(x, row):
            if x is None:
                return False
            hit = any(eq(x, f(row)) for f in item_fns)
            return hit != negated

        if q is None:
            return lambda row: member_dyn(of(row), row)
        agg = all if q == "all" else any

        def evaluate_dyn(row):
            xs = of(row)
            return xs is not None and agg(member_dyn(x, row) for x in xs)

        return evaluate_dyn
    if q is None:
        return lambda row: member(of(row))
    agg = all if q == "all" else any

    def evaluate(row):
        xs = of(row)
        return xs is not None and agg(member(x) for x in xs)

    return evaluate


def _compile_in_sub(node: BInSub, env: Env) -> Callable:
    if env.subquery is None:
        raise PlanError("subqueries are only supported inside TEMPGRAPH sources")
    of, q = _operand(node.operand, env)
    query = node.query
    run = env.subquery(query, env)
    refs = sorted(query.scope.outer_refs)
    key_fns = [_item_fn(env, s, i) for s, i in refs]
    local_cell = env.cells.get(env.local, (None, None))[0]
    memo: dict = {}
    negated = node.negated

    def values_for(row):
        if local_cell is not None:
            local_cell.row = row
        key = tuple(f(row) for f in key_fns)
        hit = memo.get(key)
        if hit is None:
            hit = memo[key] = run()
        return hit

    def member(x, pool):
        if x is None:
            return False
        return (x in pool) != negated

    if q is None:
        return lambda row: member(of(row), values_for(row))
    agg = all if q == "all" else any

    def evaluate(row):
        xs = of(row)
        if xs is None:
            return False
        pool = values_for(row)
        return agg(member(x, pool) for x in xs)

    return evaluate


def compile_predicate(node, env: Env) -> Callable[[object], bool]:
    fn = compile_expr(node, env)
    return lambda row: bool(fn(row))


def source_filter(spec: ast.SourceSpec, catalog) -> Callable[[tuple], bool] | None:
    """Compile a graph source's WHERE clause to fn(stored tuple) -> bool."""
    from ..sql.binder import Binder

    scope, bound = Binder(catalog).source_filter(spec)
    if bound is None:
        return None
    cell = Cell()
    env = Env(scope.id, {0: None}, {scope.id: (cell, {0: None})})
    return compile_predicate(bound, env)
