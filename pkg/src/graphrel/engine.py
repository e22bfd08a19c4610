"""The embedded database facade: parse, bind, plan and execute statements."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .errors import BindError, CatalogError, EngineError
from .executor.expressions import Env, compile_expr, compile_predicate
from .executor.traversal import Counters
from .graphview import GraphView, build, ensure_source_constraints
from .planner import Plan, PlannerOptions, plan as make_plan
from .sql import ast
from .sql.binder import Binder, Scope
from .sql.parser import parse, split_script
from .storage import Catalog, Schema, Table


@dataclass
class Result:
    columns: list[str] = field(default_factory=list)
    rows: list[tuple] = field(default_factory=list)
    message: str | None = None
    warnings: list[str] = field(default_factory=list)
    elapsed_ms: float = 0.0

    @property
    def is_query(self) -> bool:
        return self.message is None

    def scalar(self):
        return self.rows[0][0] if self.rows else None


class ScriptError(EngineError):
    """A statement in a script failed; ``line`` is where that statement starts."""

    def __init__(self, line: int, error: Exception):
        super().__init__(f"line {line}: {error}")
        self.line = line
        self.error = error


class Database:
    def __init__(self, auto_stats: bool = True, options: PlannerOptions | None = None):
        self.catalog = Catalog()
        self.auto_stats = auto_stats
        self.options = options or PlannerOptions()
        self.last_counters = Counters()
        self.last_plan: Plan | None = None

    # -- convenience API -----------------------------------------------------------------

    def create_table(self, name: str, schema) -> Table:
        if isinstance(schema, str):
            schema = Schema.parse(schema)
        return self.catalog.create_table(name, schema)

    def insert(self, table: str, values):
        return self.catalog.insert_tuple(table, values)

    def insert_many(self, table: str, rows) -> int:
        return self.catalog.insert_many(table, rows)

    def load_csv(self, table: str, path) -> int:
        return self.catalog.load_csv(table, str(path))

    def table(self, name: str) -> Table:
        return self.catalog.table(name)

    def graph_view(self, name: str) -> GraphView:
        return self.catalog.graph_view(name)

    # -- statements ------------------------------------------------------------------------

    def execute(self, sql: str | ast.Statement, options: PlannerOptions | None = None) -> Result:
        stmt = parse(sql) if isinstance(sql, str) else sql
        start = time.perf_counter()
        result = self._dispatch(stmt, options or self.options)
        result.elapsed_ms = (time.perf_counter() - start) * 1000.0
        return result

    def query(self, sql: str, options: PlannerOptions | None = None) -> list[tuple]:
        return self.execute(sql, options).rows

    def plan(self, sql: str | ast.Statement, options: PlannerOptions | None = None) -> Plan:
        stmt = parse(sql) if isinstance(sql, str) else sql
        if isinstance(stmt, ast.Explain):
            stmt = stmt.query
        if not isinstance(stmt, ast.Select):
            raise BindError("only SELECT statements can be planned")
        return self._plan(stmt, options or self.options)

    def explain(self, sql: str, options: PlannerOptions | None = None) -> str:
        return self.plan(sql, options).explain()

    def stream(self, sql: str, options: PlannerOptions | None = None) -> Iterator[tuple]:
        """Rows of a SELECT, pulled lazily under a read lock."""
        p = self.plan(sql, options)
        with self.catalog.lock.read():
            yield from p.rows()

    def script(self, text: str) -> list[Result]:
        results = []
        for line, chunk in split_script(text):
            try:
                results.append(self.execute(parse(chunk, line)))
            except EngineError as exc:
                raise ScriptError(line, exc) from exc
        return results

    def run_file(self, path) -> list[Result]:
        return self.script(Path(path).read_text(encoding="utf-8"))

    # -- dispatch ----------------------------------------------------------------------------

    def _dispatch(self, stmt, options: PlannerOptions) -> Result:
        if isinstance(stmt, ast.Select):
            return self._select(stmt, options)
        if isinstance(stmt, ast.Explain):
            p = self._plan(stmt.query, options)
            return Result(["plan"], [(line,) for line in p.explain().splitlines()])
        if isinstance(stmt, ast.CreateTable):
            self.catalog.create_table(stmt.name, [(c.name, c.type) for c in stmt.columns])
            return Result(message=f"table {stmt.name} created")
        if isinstance(stmt, ast.CreateGraphView):
            view = self.create_graph_view(stmt.definition)
            return Result(
                message=f"graph view {view.name} created "
                f"({len(view.vertices)} vertexes, {len(view.edges)} edges)"
            )
        if isinstance(stmt, ast.Insert):
            return Result(message=f"{self._insert(stmt)} row(s) inserted")
        if isinstance(stmt, ast.Update):
            return Result(message=f"{self._update(stmt)} row(s) updated")
        if isinstance(stmt, ast.Delete):
            return Result(message=f"{self._delete(stmt)} row(s) deleted")
        if isinstance(stmt, ast.MetaCommand):
            return self._meta(stmt)
        raise EngineError(f"unsupported statement {type(stmt).__name__}")

    def create_graph_view(self, definition: ast.GraphViewDef) -> GraphView:
        for spec in (definition.vertexes, definition.edges):
            if not self.catalog.has_table(spec.table):
                if self.catalog.has_graph_view(spec.table):
                    raise CatalogError(f"graph view sources must be tables, not {spec.table}")
                raise CatalogError(f"unknown table {spec.table!r}")
        if self.catalog.has_graph_view(definition.name) or self.catalog.has_table(definition.name):
            raise CatalogError(f"{definition.name!r} already exists")
        with self.catalog.lock.write():
            view = build(definition, self.catalog)
            ensure_source_constraints(view)
            self.catalog.register_graph_view(view)
            view.compute_stats()
        return view

    def _plan(self, select: ast.Select, options: PlannerOptions) -> Plan:
        bound = Binder(self.catalog).bind_select(select)
        if self.auto_stats:
            for item in bound.items:
                if item.view is not None:
                    item.view.compute_stats()
        counters = Counters()
        p = make_plan(bound, self.catalog, options, counters)
        self.last_counters = counters
        self.last_plan = p
        return p

    def _select(self, select: ast.Select, options: PlannerOptions) -> Result:
        p = self._plan(select, options)
        with self.catalog.lock.read():
            rows = list(p.rows())
        return Result(list(p.columns), rows, warnings=list(p.warnings))

    # -- DML ------------------------------------------------------------------------------------

    def _constant(self, expr):
        scope = Scope([])
        bound = Binder(self.catalog).expr(expr, scope)
        return compile_expr(bound, Env(scope.id, {}))(())

    def _insert(self, stmt: ast.Insert) -> int:
        table = self.catalog.table(stmt.table)
        schema = table.schema
        rows = []
        for values in stmt.rows:
            values = [self._constant(v) for v in values]
            if stmt.columns is None:
                rows.append(values)
                continue
            if len(values) != len(stmt.columns):
                raise BindError(f"{len(stmt.columns)} columns but {len(values)} values")
            full = [None] * len(schema)
            for name, v in zip(stmt.columns, values):
                full[schema.position(name)] = v
            rows.append(full)
        return self.catalog.insert_many(table, rows)

    def _row_predicate(self, binder: Binder, scope: Scope, where):
        if where is None:
            return None
        bound = binder.expr(where, scope)
        binder._require_predicate(bound, where)
        fn = compile_predicate(bound, Env(scope.id, {0: None}))
        return lambda rv: fn(rv.row)

    def _update(self, stmt: ast.Update) -> int:
        binder = Binder(self.catalog)
        scope = binder.table_scope(stmt.table)
        table = scope.items[0].table
        env = Env(scope.id, {0: None})
        assignments = {}
        for col, expr in stmt.assignments:
            table.schema.position(col)
            fn = compile_expr(binder.expr(expr, scope), env)
            assignments[col] = lambda rv, fn=fn: fn(rv.row)
        return self.catalog.update_where(table, assignments, self._row_predicate(binder, scope, stmt.where))

    def _delete(self, stmt: ast.Delete) -> int:
        binder = Binder(self.catalog)
        scope = binder.table_scope(stmt.table)
        table = scope.items[0].table
        return self.catalog.delete_where(table, self._row_predicate(binder, scope, stmt.where))

    # -- meta commands ------------------------------------------------------------------------

    def _meta(self, stmt: ast.MetaCommand) -> Result:
        name, args = stmt.name, stmt.args
        if name == "tables":
            rows = [(t.name, len(t)) for t in self.catalog.tables.values()]
            return Result(["table", "rows"], rows)
        if name == "views":
            rows = []
            for v in self.catalog.graph_views.values():
                kind = "directed" if v.directed else "undirected"
                rows.append((v.name, kind, len(v.vertices), len(v.edges), len(v.dangling)))
            return Result(["view", "kind", "vertexes", "edges", "dangling"], rows)
        if name == "analyze":
            views = [self.catalog.graph_view(a) for a in args] if args else list(self.catalog.graph_views.values())
            rows = []
            for v in views:
                s = v.compute_stats()
                rows.append((v.name, s.vertex_count, s.arc_count, round(s.avg_fan_out, 6)))
            return Result(["view", "vertexes", "arcs", "avg_fan_out"], rows)
        if name == "load":
            if len(args) != 2:
                raise EngineError("usage: .load <table> <path>")
            n = self.catalog.load_csv(args[0], args[1])
            return Result(message=f"{n} row(s) loaded into {args[0]}")
        raise EngineError(f"unknown command .{name}")
