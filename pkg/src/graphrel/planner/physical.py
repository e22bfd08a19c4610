"""Physical planning: bound SELECT -> operator tree.

Evaluation order follows the conceptual model of the dialect: relational
items are joined first (left to right in FROM order), every path item is then
probed innermost with the joined row, remaining conjuncts filter the result,
and the SELECT list projects or aggregates it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import PlanError
from ..executor.expressions import Cell, Env, compile_expr, compile_predicate
from ..executor.operators import (
    Aggregate, EdgeScan, EmptyResult, Filter, IndexScan, Limit, NestedLoopJoin, Operator,
    Project, SingleRow, TableScan, VertexScan,
)
from ..executor.pathscan import PathScan, PathScanSpec, TempGraph
from ..executor.traversal import Counters
from ..sql.binder import BCmp, BLit, BoundSelect, Col, Conjunct, Item, RelAgg, item_refs
from .rules import LengthInterval, PredicateClass, classify_predicates, infer_path_length, select_traversal


@dataclass
class PlannerOptions:
    pushdown: bool = True
    infer_length: bool = True
    use_probe: bool = True
    traversal: str | None = None  # force "dfs" or "bfs"
    prune: bool = True
    goal_directed: bool = True

    @classmethod
    def naive(cls) -> "PlannerOptions":
        """No pushdown, no inferred interval, every predicate evaluated above the scans."""
        return cls(pushdown=False, infer_length=False, use_probe=False, prune=False, goal_directed=False)


@dataclass
class Plan:
    root: Operator
    columns: list[str]
    counters: Counters
    warnings: list[str] = field(default_factory=list)
    classes: PredicateClass | None = None

    def rows(self):
        return self.root.rows()

    def explain(self) -> str:
        lines = self.root.explain_lines()
        lines.extend(f"warning: {w}" for w in self.warnings)
        return "\n".join(lines)

    def path_scans(self) -> list[PathScan]:
        return [op for op in self.root.walk() if isinstance(op, PathScan)]


def _text(conjuncts: list[Conjunct]) -> str:
    return " AND ".join(c.text for c in conjuncts)


def _all(fns):
    if len(fns) == 1:
        return fns[0]
    return lambda row: all(f(row) for f in fns)


class Planner:
    def __init__(
        self,
        catalog,
        options: PlannerOptions | None = None,
        counters: Counters | None = None,
        cells: dict | None = None,
        allow_subquery: bool = False,
    ):
        self.catalog = catalog
        self.options = options or PlannerOptions()
        self.counters = counters if counters is not None else Counters()
        self.cells = dict(cells or {})
        self.allow_subquery = allow_subquery
        self.warnings: list[str] = []

    # subqueries only appear inside TEMPGRAPH sources
    def _subquery(self, query: BoundSelect, env: Env):
        sub = Planner(self.catalog, self.options, self.counters, env.cells, allow_subquery=True)
        plan = sub.build(query)
        self.warnings.extend(sub.warnings)

        def run():
            return frozenset(r[0] for r in plan.root.rows() if r[0] is not None)

        return run

    def _env(self, scope_id: int, layout: dict, cells: dict | None = None) -> Env:
        subquery = self._subquery if self.allow_subquery else None
        return Env(scope_id, layout, self.cells if cells is None else cells, subquery)

    # -- scans ---------------------------------------------------------------------------

    def _scan(self, item: Item, scope_id: int, filters: list[Conjunct]) -> Operator:
        filters = list(filters)
        op: Operator
        if item.kind == "table":
            op = None
            for c in filters:
                hit = self._index_probe(item, c.bound)
                if hit is not None:
                    pos, value = hit
                    op = IndexScan(item.table, pos, value, item.describe(), c.text)
                    filters.remove(c)
                    break
            if op is None:
                op = TableScan(item.table, item.describe())
        elif item.kind == "vertexes":
            op = VertexScan(item.view, item.describe())
        else:
            op = EdgeScan(item.view, item.describe())
        if filters:
            env = self._env(scope_id, {item.index: 0})
            op = Filter(op, _all([compile_predicate(c.bound, env) for c in filters]), _text(filters))
        return op

    @staticmethod
    def _index_probe(item: Item, node):
        if not isinstance(node, BCmp) or node.op != "=":
            return None
        for a, b in ((node.left, node.right), (node.right, node.left)):
            if isinstance(a, Col) and a.kind == "table" and isinstance(b, BLit) and b.value is not None:
                if item.table.has_index(a.field):
                    return a.field, b.value
        return None

    # -- joins -----------------------------------------------------------------------------

    @staticmethod
    def _equi_key(node, joined: set[int], k: int, scope_id: int):
        if not isinstance(node, BCmp) or node.op != "=":
            return None
        for a, b in ((node.left, node.right), (node.right, node.left)):
            ra = {i for s, i in item_refs(a) if s == scope_id}
            rb = {i for s, i in item_refs(b) if s == scope_id}
            if ra and ra <= joined and rb == {k} and isinstance(a, Col) and isinstance(b, Col):
                return a, b
        return None

    # -- main entry -------------------------------------------------------------------------

    def build(self, bound: BoundSelect) -> Plan:
        opts = self.options
        sid = bound.scope.id
        items = bound.items
        classes = classify_predicates(bound, use_probe=True)
        sp_items = {it.index for it in items if it.is_path and it.weight is not None}
        links = []
        residual = list(classes.residual)
        for link in classes.probe_links:
            # shortest-path scans define their output by source and target,
            # so they always consume their probe links
            if opts.use_probe or link.path in sp_items:
                links.append(link)
            elif link.literal and opts.pushdown:
                classes.pushable.setdefault(link.path, []).append(link.conjunct)
            else:
                residual.append(link.conjunct)

        relational = [it for it in items if not it.is_path]
        paths = [it for it in items if it.is_path]
        local: dict[int, list[Conjunct]] = {}
        joins: list[Conjunct] = []
        constant: list[Conjunct] = []
        for c in classes.relational:
            refs = {i for s, i in item_refs(c.bound) if s == sid}
            if not refs:
                constant.append(c)
            elif len(refs) == 1:
                local.setdefault(next(iter(refs)), []).append(c)
            else:
                joins.append(c)

        left: Operator | None = None
        layout: dict[int, int] = {}
        joined: set[int] = set()
        for it in relational:
            scan = self._scan(it, sid, local.get(it.index, []))
            if left is None:
                left, layout, joined = scan, {it.index: 0}, {it.index}
                continue
            k = it.index
            ready = [c for c in joins if {i for s, i in item_refs(c.bound) if s == sid} <= joined | {k}]
            okeys, ikeys, used = [], [], []
            for c in ready:
                pair = self._equi_key(c.bound, joined, k, sid)
                if pair is not None:
                    okeys.append(compile_expr(pair[0], self._env(sid, layout)))
                    ikeys.append(compile_expr(pair[1], self._env(sid, {k: 0})))
                    used.append(c)
            new_layout = dict(layout)
            new_layout[k] = len(layout)
            left = NestedLoopJoin(left, scan, okeys or None, ikeys or None, text=_text(used))
            rest = [c for c in ready if c not in used]
            if rest:
                env = self._env(sid, new_layout)
                left = Filter(left, _all([compile_predicate(c.bound, env) for c in rest]), _text(rest))
            joins = [c for c in joins if c not in ready]
            layout, joined = new_layout, joined | {k}
        residual.extend(joins)

        for it in paths:
            scan = self._path_scan(bound, it, classes, links, residual, layout)
            if left is None:
                left, layout = scan, {it.index: 0}
            else:
                cell = scan.cell if isinstance(scan, PathScan) else None
                if cell is None:
                    left = NestedLoopJoin(left, scan)
                else:
                    left = NestedLoopJoin(left, scan, cell=cell)
                layout = dict(layout)
                layout[it.index] = len(layout)
        if left is None:
            left = SingleRow()

        after = constant + residual
        if after:
            env = self._env(sid, layout)
            left = Filter(left, _all([compile_predicate(c.bound, env) for c in after]), _text(after))

        env = self._env(sid, layout)
        labels = [o.label for o in bound.outputs]
        if bound.aggregate:
            specs = []
            for o in bound.outputs:
                if isinstance(o.expr, RelAgg):
                    fn = None if o.expr.arg is None else compile_expr(o.expr.arg, env)
                    specs.append((o.expr.func, fn, None))
                else:
                    specs.append((None, None, o.expr.value))
            root: Operator = Aggregate(left, specs, labels)
        else:
            root = Project(left, [compile_expr(o.expr, env) for o in bound.outputs], labels)
        limits = [n for n in (bound.top, bound.limit) if n is not None]
        if limits:
            root = Limit(root, min(limits))
        return Plan(root, labels, self.counters, self.warnings, classes)

    def _path_scan(self, bound, item: Item, classes: PredicateClass, links, residual, layout) -> Operator:
        opts = self.options
        sid = bound.scope.id
        pushable = classes.pushable.get(item.index, [])
        interval = infer_path_length(pushable, item.index) if opts.infer_length else LengthInterval()
        if not opts.pushdown:
            residual.extend(pushable)
        if interval.empty:
            self.warnings.append(
                f"path length constraints on {item.alias} are unsatisfiable {interval}; the result is empty"
            )
            return EmptyResult(f"{item.alias}: unsatisfiable length {interval}")
        view = item.view
        stats = None if view is None else view.stats
        if item.weight is not None:
            kind = select_traversal(item.weight_name, stats, interval).kind
        elif opts.traversal is not None:
            kind = opts.traversal
        else:
            kind = select_traversal(None, stats, interval).kind
        spec = PathScanSpec(
            item, kind, interval.lo, interval.hi,
            pushed=[c.bound for c in pushable] if opts.pushdown else [],
            sp_filters=[c.bound for c in pushable] if kind == "sp" else [],
            prune=opts.prune, goal_directed=opts.goal_directed,
        )
        outer_env = self._env(sid, layout)
        for link in links:
            if link.path != item.index:
                continue
            if link.literal:
                if link.end == "start":
                    spec.seed_sets.append(link.values)
                else:
                    spec.target_values.append(link.values[0])
            else:
                fn = compile_expr(link.expr, outer_env)
                (spec.seed_fns if link.end == "start" else spec.target_fns).append(fn)
        cell = Cell()
        cell.row = ()
        if item.temp is not None:
            cells = dict(self.cells)
            cells[sid] = (cell, dict(layout))
            source = TempGraph(item.temp, self.catalog, cells, self._subquery, self.counters)
        else:
            if view is None:
                raise PlanError(f"{item.alias} has no graph view")
            source = view
        return PathScan(spec, sid, source, cell, self.counters, self.catalog)


def plan(bound: BoundSelect, catalog, options: PlannerOptions | None = None, counters: Counters | None = None) -> Plan:
    return Planner(catalog, options, counters).build(bound)


def explain(plan_or_bound, catalog=None, options: PlannerOptions | None = None) -> str:
    if isinstance(plan_or_bound, Plan):
        return plan_or_bound.explain()
    return plan(plan_or_bound, catalog, options).explain()
