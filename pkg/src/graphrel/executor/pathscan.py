"""PathScan and TempGraph operators.

A PathScan turns the conjuncts the planner pushed into it into
:class:`TraversalConstraints`: every pushed conjunct is evaluated in full on
emitted paths, and the ones with a recognisable shape also yield pruning
checks on partial paths.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from ..graphview import GraphView
from ..sql import ast
from ..sql.binder import BCmp, BIn, BLit, Item, PathAgg, PathElem, PathProp, TempSpec, walk
from .expressions import (
    Cell, Env, _item_fn, comparison, compile_predicate, element_field_fn, fold,
    membership, path_values_fn, quantifier,
)
from .operators import Operator
from .traversal import INF, Counters, TraversalConstraints, bfs_scan, dfs_scan, sp_scan

_FLIP = {"=": "=", "<>": "<>", "<": ">", "<=": ">=", ">": "<", ">=": "<="}


@dataclass
class PathScanSpec:
    item: Item
    kind: str  # dfs | bfs | sp
    lo: int = 1
    hi: float = INF
    pushed: list = field(default_factory=list)  # bound conjuncts evaluated by the scan
    sp_filters: list = field(default_factory=list)  # universal [0..*] conjuncts defining SP's sub-graph
    seed_fns: list[Callable] = field(default_factory=list)  # outer row -> start vertex id
    seed_sets: list[tuple] = field(default_factory=list)  # literal id lists, in written order
    target_fns: list[Callable] = field(default_factory=list)
    target_values: list = field(default_factory=list)
    prune: bool = True
    goal_directed: bool = True

    @property
    def seed_mode(self) -> str:
        if self.seed_fns:
            return "probe"
        return "literal" if self.seed_sets else "all"

    @property
    def target_mode(self) -> str | None:
        if self.target_fns:
            return "probe"
        return "literal" if self.target_values else None

    def kind_label(self) -> str:
        if self.kind == "sp":
            return f"SP({self.item.weight_name})"
        return self.kind.upper()


# -- constraint compilation ------------------------------------------------------------


def stable_depth(node) -> int | None:
    """Length from which a conjunct's value can no longer change, if any.

    Only references to fixed positions qualify: once the prefix covers them,
    extending the path leaves every referenced value untouched.
    """
    depth = 0
    for n in walk(node):
        if isinstance(n, PathProp):
            return None
        if isinstance(n, PathElem):
            if n.coll == "start":
                continue
            if n.coll == "end":
                return None
            index = n.index
            offset = 1 if n.coll == "edges" else 0
            if isinstance(index, ast.Single):
                depth = max(depth, index.position + offset)
            elif isinstance(index, ast.Range) and index.hi is not None:
                depth = max(depth, index.hi + offset)
            else:
                return None
    return depth


def _constant(node) -> bool:
    return isinstance(node, BLit)


def _element_test(node):
    """(elem, value test) for ``collection op constant`` universal forms."""
    if isinstance(node, BCmp):
        left, right, op = node.left, node.right, node.op
        if quantifier(right) == "all" and _constant(left):
            left, right, op = right, left, _FLIP[op]
        if quantifier(left) != "all" or not _constant(right):
            return None
        test, value = comparison(op), right.value
        return left, lambda x: test(x, value)
    if isinstance(node, BIn):
        if quantifier(node.operand) != "all" or not all(_constant(i) for i in node.items):
            return None
        return node.operand, membership([i.value for i in node.items], node.negated)
    return None


def _bounds(elem: PathElem) -> tuple[int, float]:
    index = elem.index
    if isinstance(index, ast.Range):
        return index.lo, (INF if index.hi is None else index.hi)
    return 0, INF


def element_check(node):
    """Translate a universal element predicate into a per-step check.

    Returns ``("edge" | "vertex", lo, hi, fn(path), elem, test)`` or None.
    """
    found = _element_test(node)
    if found is None:
        return None
    elem, test = found
    lo, hi = _bounds(elem)
    get = element_field_fn(elem)
    if elem.coll == "vertexes":
        return "vertex", lo, hi, (lambda p: test(get(p.view, p.end))), elem, test
    if elem.sub is None:
        return "edge", lo, hi, (lambda p: test(get(p.view, p.edge))), elem, test
    if elem.sub == "start":
        return "edge", lo, hi, (lambda p: test(get(p.view, p.parent.end))), elem, test
    return "edge", lo, hi, (lambda p: test(get(p.view, p.end))), elem, test


_MONOTONE = {
    "COUNT": ("<", "<="),
    "SUM": ("<", "<="),
    "MAX": ("<", "<="),
    "MIN": (">", ">="),
}


def monotone_check(node):
    """(fn(path), elem or None) for aggregates no extension can bring back.

    The elem is returned for SUM, whose pruning additionally needs the
    attribute to be non-negative across the view.
    """
    if not isinstance(node, BCmp):
        return None
    left, right, op = node.left, node.right, node.op
    if isinstance(right, PathAgg) and _constant(left):
        left, right, op = right, left, _FLIP[op]
    if not isinstance(left, PathAgg) or not _constant(right):
        return None
    if left.elem.index is not None or op not in _MONOTONE.get(left.func, ()):
        return None
    if not isinstance(right.value, (int, float)) or isinstance(right.value, bool):
        return None
    values = path_values_fn(left.elem)
    test, bound, func = comparison(op), right.value, left.func

    def check(p):
        v = fold(func, values(p))
        return v is None or test(v, bound)

    return check, (left.elem if func == "SUM" else None)


def nonnegative(view: GraphView, elem: PathElem) -> bool:
    fld = elem.field
    if fld in ("fanin", "fanout"):
        return True
    if not isinstance(fld, int):
        # vertex or edge ids
        return all(v >= 0 for v in view.vertices) and all(e >= 0 for e in view.edges)
    if elem.vertex_valued:
        rows = view.vertex_table._rows
        slots = (r.slot for r in view.vertices.values())
    else:
        rows = view.edge_table._rows
        slots = (r.slot for r in view.edges.values())
    for slot in slots:
        v = rows[slot][fld]
        if v is not None and v < 0:
            return False
    return True


# -- operators ---------------------------------------------------------------------------


class TempGraph(Operator):
    """Materializes a TEMPGRAPH source, once per distinct outer binding."""

    name = "TempGraph"

    def __init__(self, spec: TempSpec, catalog, cells: dict, subquery, counters: Counters):
        super().__init__()
        self.spec = spec
        self.catalog = catalog
        self.counters = counters
        self.correlated = bool(spec.outer_refs)
        self.vertex_filter = self._compile(spec.vertex_scope, spec.vertex_filter, cells, subquery)
        self.edge_filter = self._compile(spec.edge_scope, spec.edge_filter, cells, subquery)
        env = Env(-1, {}, cells, subquery)
        self._key_fns = [_item_fn(env, s, i) for s, i in sorted(spec.outer_refs)]
        self._key = None
        self._view: GraphView | None = None

    @staticmethod
    def _compile(scope, bound, cells, subquery):
        if bound is None:
            return None
        local_cells = dict(cells)
        local_cells[scope.id] = (Cell(), {0: None})
        return compile_predicate(bound, Env(scope.id, {0: None}, local_cells, subquery))

    def current(self) -> GraphView:
        key = tuple(f(None) for f in self._key_fns)
        if self._view is None or key != self._key:
            self._view = GraphView(
                self.spec.definition, self.catalog, self.vertex_filter, self.edge_filter, temporary=True
            )
            self._key = key
            self.counters.tempgraph_builds += 1
        return self._view

    def rows(self):
        return iter(())

    def label(self) -> str:
        d = self.spec.definition
        parts = [f"VERTEXES FROM {d.vertexes.table}", f"EDGES FROM {d.edges.table}"]
        if self.correlated:
            parts.append("correlated")
        return f"TempGraph({', '.join(parts)})"


def _conjoin(tests):
    if not tests:
        return None
    if len(tests) == 1:
        (g, t), = tests
        return lambda view, x: t(g(view, x))
    return lambda view, x: all(t(g(view, x)) for g, t in tests)


class PathScan(Operator):
    name = "PathScan"

    def __init__(self, spec: PathScanSpec, scope_id: int, source, cell: Cell, counters: Counters, catalog):
        children = (source,) if isinstance(source, TempGraph) else ()
        super().__init__(*children)
        self.spec = spec
        self.source = source
        self.cell = cell
        self.counters = counters
        self.catalog = catalog
        env = Env(scope_id, {spec.item.index: None})
        self.accept = [compile_predicate(b, env) for b in spec.pushed]
        self.positional: dict[int, list] = {}
        self.edge_checks: list = []
        self.vertex_checks: list = []
        self.monotone: list = []
        self.sum_guards: list = []  # (check, elem) pairs that need non-negative data
        for bound, fn in zip(spec.pushed, self.accept):
            ec = element_check(bound)
            if ec is not None:
                kind, lo, hi, check = ec[:4]
                (self.edge_checks if kind == "edge" else self.vertex_checks).append((lo, hi, check))
                continue
            mc = monotone_check(bound)
            if mc is not None:
                check, elem = mc
                if elem is None:
                    self.monotone.append(check)
                else:
                    self.sum_guards.append((check, elem))
                continue
            d = stable_depth(bound)
            if d is not None and d <= spec.hi:
                self.positional.setdefault(d, []).append(fn)
        # universal element filters restrict the sub-graph: shortest-path scans
        # run on it, the others use it to bound the distance to a target
        self._subgraph_filters(spec.sp_filters if spec.kind == "sp" else spec.pushed)
        self._nonneg: dict = {}

    def _subgraph_filters(self, conjuncts) -> None:
        edge_tests, vertex_tests = [], []
        for bound in conjuncts:
            ec = element_check(bound)
            if ec is None or ec[1] != 0 or ec[2] != INF:
                continue
            kind, elem, test = ec[0], ec[4], ec[5]
            if kind == "vertex":
                vertex_tests.append((element_field_fn(elem), test))
            elif elem.sub is None:
                edge_tests.append((element_field_fn(elem), test))
        self.edge_filter = _conjoin(edge_tests)
        self.vertex_filter = _conjoin(vertex_tests)

    def _monotone_for(self, view: GraphView) -> list:
        checks = list(self.monotone)
        for check, elem in self.sum_guards:
            key = (id(view), view.build_count, self.catalog.mutation_count, elem.coll, elem.sub, elem.field)
            ok = self._nonneg.get(key)
            if ok is None:
                ok = self._nonneg[key] = nonnegative(view, elem)
            if ok:
                checks.append(check)
        return checks

    def _seeds(self, row):
        spec = self.spec
        if not spec.seed_fns and not spec.seed_sets:
            return None
        pool = None
        for fn in spec.seed_fns:
            v = fn(row)
            s = set() if v is None else {v}
            pool = s if pool is None else pool & s
        for values in spec.seed_sets:
            pool = set(values) if pool is None else pool & set(values)
        if spec.seed_sets and not spec.seed_fns:
            # literal lists keep their written order
            return [v for v in spec.seed_sets[0] if v in pool]
        return sorted(pool)

    def _target(self, row):
        spec = self.spec
        values = [fn(row) for fn in spec.target_fns] + list(spec.target_values)
        if not values:
            return None, True
        first = values[0]
        if first is None or any(v is None or v != first for v in values[1:]):
            return None, False
        return first, True

    def constraints(self, view: GraphView, row) -> TraversalConstraints | None:
        spec = self.spec
        target, possible = self._target(row)
        if not possible:
            return None
        return TraversalConstraints(
            lo=spec.lo,
            hi=spec.hi,
            seeds=self._seeds(row),
            target=target,
            accept=self.accept,
            positional=self.positional,
            edge_checks=self.edge_checks,
            vertex_checks=self.vertex_checks,
            monotone=self._monotone_for(view) if spec.prune else [],
            edge_filter=self.edge_filter,
            vertex_filter=self.vertex_filter,
            prune=spec.prune,
            goal_directed=spec.goal_directed,
        )

    def rows(self):
        view = self.source.current() if isinstance(self.source, TempGraph) else self.source
        c = self.constraints(view, self.cell.row)
        if c is None:
            return
        if self.spec.kind == "sp":
            scan = sp_scan(view, self.spec.item.weight, c, self.counters)
        elif self.spec.kind == "bfs":
            scan = bfs_scan(view, c, self.counters)
        else:
            scan = dfs_scan(view, c, self.counters)
        try:
            for path in scan:
                yield (path,)
        finally:
            scan.close()

    def label(self) -> str:
        spec = self.spec
        hi = "*" if spec.hi == INF else int(spec.hi)
        parts = [spec.kind_label(), spec.item.describe(), f"seed={spec.seed_mode}"]
        if spec.target_mode is not None:
            parts.append(f"target={spec.target_mode}")
        parts.append(f"len=[{spec.lo},{hi}]")
        parts.append(f"pushed={len(spec.pushed)}")
        return f"PathScan({', '.join(parts)})"

