"""Pull-based operators.

Each operator implements ``rows()`` as a generator, which is what keeps the
pipeline lazy: nothing is computed until a parent pulls. ``open``/``next``/
``close`` wrap that generator for callers that want the classic iterator
interface; ``next`` keeps returning None after exhaustion.
"""

from __future__ import annotations

from typing import Callable, Iterator

from ..graphview import GraphView
from ..storage import Table
from .expressions import Cell, fold


class Operator:
    name = "Operator"

    def __init__(self, *children: "Operator"):
        self.children = list(children)
        self._gen = None

    def rows(self) -> Iterator[tuple]:
        raise NotImplementedError

    def open(self) -> None:
        self.close()
        self._gen = self.rows()

    def next(self):
        if self._gen is None:
            return None
        row = next(self._gen, None)
        if row is None:
            self._gen = None
        return row

    def close(self) -> None:
        gen, self._gen = self._gen, None
        if gen is not None:
            gen.close()

    def __iter__(self):
        return self.rows()

    def label(self) -> str:
        return self.name

    def explain_lines(self, depth: int = 0) -> list[str]:
        lines = ["  " * depth + self.label()]
        for child in self.children:
            lines.extend(child.explain_lines(depth + 1))
        return lines

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()


class SingleRow(Operator):
    """One empty row: the outer side of a query with only path items."""

    name = "SingleRow"

    def rows(self):
        yield ()


class EmptyResult(Operator):
    name = "EmptyResult"

    def __init__(self, reason: str):
        super().__init__()
        self.reason = reason

    def rows(self):
        return iter(())

    def label(self) -> str:
        return f"EmptyResult({self.reason})"


class TableScan(Operator):
    name = "TableScan"

    def __init__(self, table: Table, description: str):
        super().__init__()
        self.table = table
        self.description = description

    def rows(self):
        for _, row in self.table.scan():
            yield (row,)

    def label(self) -> str:
        return f"TableScan({self.description})"


class IndexScan(Operator):
    """Hash-index lookup of ``column = value`` on a table."""

    name = "IndexScan"

    def __init__(self, table: Table, column: int, value: object, description: str, condition: str):
        super().__init__()
        self.table = table
        self.column = column
        self.value = value
        self.description = description
        self.condition = condition

    def rows(self):
        if self.value is None:
            return
        index = self.table.ensure_index(self.column)
        for slot in list(index.get(self.value, ())):
            row = self.table.get(slot)
            if row is not None:
                yield (row,)

    def label(self) -> str:
        return f"IndexScan({self.description}, {self.condition})"


class VertexScan(Operator):
    name = "VertexScan"

    def __init__(self, view: GraphView, description: str):
        super().__init__()
        self.view = view
        self.description = description

    def rows(self):
        for rec in list(self.view.vertices.values()):
            yield (rec,)

    def label(self) -> str:
        return f"VertexScan({self.description})"


class EdgeScan(Operator):
    name = "EdgeScan"

    def __init__(self, view: GraphView, description: str):
        super().__init__()
        self.view = view
        self.description = description

    def rows(self):
        for rec in list(self.view.edges.values()):
            yield (rec,)

    def label(self) -> str:
        return f"EdgeScan({self.description})"


class Filter(Operator):
    name = "Filter"

    def __init__(self, child: Operator, predicate: Callable, text: str):
        super().__init__(child)
        self.predicate = predicate
        self.text = text

    def rows(self):
        pred = self.predicate
        for row in self.children[0].rows():
            if pred(row):
                yield row

    def label(self) -> str:
        return f"Filter({self.text})"


class Project(Operator):
    name = "Project"

    def __init__(self, child: Operator, fns: list[Callable], labels: list[str]):
        super().__init__(child)
        self.fns = fns
        self.labels = labels

    def rows(self):
        fns = self.fns
        for row in self.children[0].rows():
            yield tuple(f(row) for f in fns)

    def label(self) -> str:
        return f"Project({', '.join(self.labels)})"


class NestedLoopJoin(Operator):
    """Concatenates outer and inner rows.

    Three modes: plain (inner materialized once), hashed on equi-join keys
    (inner materialized into a hash table once), and probe, where the inner
    side is re-run for every outer row with ``cell`` holding that row.
    """

    name = "NestedLoopJoin"

    def __init__(
        self,
        outer: Operator,
        inner: Operator,
        outer_keys: list[Callable] | None = None,
        inner_keys: list[Callable] | None = None,
        cell: Cell | None = None,
        text: str = "",
    ):
        super().__init__(outer, inner)
        self.outer_keys = outer_keys
        self.inner_keys = inner_keys
        self.cell = cell
        self.text = text

    def rows(self):
        outer, inner = self.children
        if self.cell is not None:
            cell = self.cell
            for orow in outer.rows():
                cell.row = orow
                for irow in inner.rows():
                    yield orow + irow
            return
        if self.outer_keys:
            okeys, ikeys = self.outer_keys, self.inner_keys
            table: dict | None = None
            for orow in outer.rows():
                if table is None:
                    table = {}
                    for irow in inner.rows():
                        key = tuple(k(irow) for k in ikeys)
                        if None not in key:
                            table.setdefault(key, []).append(irow)
                key = tuple(k(orow) for k in okeys)
                for irow in table.get(key, ()):
                    yield orow + irow
            return
        cache: list | None = None
        for orow in outer.rows():
            if cache is None:
                cache = list(inner.rows())
            for irow in cache:
                yield orow + irow

    def label(self) -> str:
        if self.cell is not None:
            mode = "probe"
        elif self.outer_keys:
            mode = "hash"
        else:
            mode = None
        parts = [p for p in (mode, self.text) if p]
        return f"NestedLoopJoin({': '.join(parts)})" if parts else "NestedLoopJoin"


class Aggregate(Operator):
    """Whole-input aggregation (there is no grouping)."""

    name = "Aggregate"

    def __init__(self, child: Operator, specs: list[tuple[str, Callable | None, object]], labels: list[str]):
        super().__init__(child)
        # (func, argument fn or None for COUNT(*), constant for literal outputs)
        self.specs = specs
        self.labels = labels

    def rows(self):
        columns: list[list] = [[] for _ in self.specs]
        count = 0
        for row in self.children[0].rows():
            count += 1
            for col, (func, fn, _) in zip(columns, self.specs):
                if fn is not None:
                    col.append(fn(row))
        out = []
        for col, (func, fn, const) in zip(columns, self.specs):
            if func is None:
                out.append(const)
            elif fn is None:
                out.append(count)
            else:
                out.append(fold(func, col))
        yield tuple(out)

    def label(self) -> str:
        return f"Aggregate({', '.join(self.labels)})"


class Limit(Operator):
    name = "Limit"

    def __init__(self, child: Operator, n: int):
        super().__init__(child)
        self.n = n

    def rows(self):
        if self.n <= 0:
            return
        remaining = self.n
        source = self.children[0].rows()
        try:
            for row in source:
                yield row
                remaining -= 1
                if remaining == 0:
                    break
        finally:
            source.close()

    def label(self) -> str:
        return f"Limit({self.n})"
