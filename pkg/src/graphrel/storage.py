"""In-memory relational storage: typed tables with stable tuple locators.

Tables never compact. A deleted tuple leaves a hole, so a slot handed out by
``insert_tuple`` keeps naming the same tuple until that tuple is deleted and is
never reused afterwards.

The :class:`Catalog` owns every table and graph view and routes each mutation
through the maintenance hooks of the graph views defined over the table. A
mutation and its hooks form one atomic unit: if anything raises, the relational
state is restored from an undo log and the affected topologies are rebuilt.
"""

from __future__ import annotations

import csv
import enum
import os
import threading
from collections.abc import Callable, Iterator, Mapping
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Any, NamedTuple

from .errors import CatalogError, ConstraintError, CsvLoadError


class ColumnType(str, enum.Enum):
    INTEGER = "integer"
    FLOAT = "float"
    TEXT = "text"
    BOOLEAN = "boolean"


_TYPE_NAMES = {
    "int": ColumnType.INTEGER,
    "integer": ColumnType.INTEGER,
    "bigint": ColumnType.INTEGER,
    "smallint": ColumnType.INTEGER,
    "float": ColumnType.FLOAT,
    "real": ColumnType.FLOAT,
    "double": ColumnType.FLOAT,
    "decimal": ColumnType.FLOAT,
    "text": ColumnType.TEXT,
    "varchar": ColumnType.TEXT,
    "string": ColumnType.TEXT,
    "char": ColumnType.TEXT,
    "boolean": ColumnType.BOOLEAN,
    "bool": ColumnType.BOOLEAN,
}


def column_type(name: str | ColumnType) -> ColumnType:
    if isinstance(name, ColumnType):
        return name
    try:
        return _TYPE_NAMES[name.lower()]
    except KeyError:
        raise CatalogError(f"unknown column type {name!r}") from None


def check_value(value: Any, ctype: ColumnType) -> Any:
    """Return ``value`` coerced to ``ctype`` or raise ConstraintError."""
    if value is None:
        return None
    if ctype is ColumnType.INTEGER:
        if isinstance(value, int) and not isinstance(value, bool):
            return value
        if isinstance(value, float) and value.is_integer():
            return int(value)
    elif ctype is ColumnType.FLOAT:
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
    elif ctype is ColumnType.TEXT:
        if isinstance(value, str):
            return value
    elif isinstance(value, bool):
        return value
    raise ConstraintError(f"value {value!r} does not match column type {ctype.value}")


@dataclass(frozen=True)
class Column:
    name: str
    type: ColumnType


class Schema:
    """Ordered, case-insensitively unique column list."""

    def __init__(self, columns):
        cols = []
        for col in columns:
            if isinstance(col, Column):
                cols.append(col)
            else:
                name, ctype = col
                cols.append(Column(name, column_type(ctype)))
        if not cols:
            raise CatalogError("a schema needs at least one column")
        self.columns: tuple[Column, ...] = tuple(cols)
        self._positions: dict[str, int] = {}
        for i, col in enumerate(self.columns):
            key = col.name.lower()
            if key in self._positions:
                raise CatalogError(f"duplicate column name {col.name!r}")
            self._positions[key] = i

    @classmethod
    def parse(cls, text: str) -> "Schema":
        """Build from ``"uId:int, lName:text"`` shorthand."""
        cols = []
        for part in text.split(","):
            name, _, ctype = part.strip().partition(":")
            cols.append((name.strip(), ctype.strip() or "text"))
        return cls(cols)

    def __len__(self):
        return len(self.columns)

    def __iter__(self):
        return iter(self.columns)

    def __eq__(self, other):
        return isinstance(other, Schema) and self.columns == other.columns

    def __repr__(self):
        inner = ", ".join(f"{c.name}:{c.type.value}" for c in self.columns)
        return f"Schema({inner})"

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    def find(self, name: str) -> int | None:
        return self._positions.get(name.lower())

    def position(self, name: str) -> int:
        pos = self._positions.get(name.lower())
        if pos is None:
            raise CatalogError(f"unknown column {name!r}")
        return pos

    def coerce(self, values) -> tuple:
        values = tuple(values)
        if len(values) != len(self.columns):
            raise ConstraintError(
                f"expected {len(self.columns)} values, got {len(values)}"
            )
        return tuple(check_value(v, c.type) for v, c in zip(values, self.columns))


class TupleLocator(NamedTuple):
    table: str
    slot: int


class RowView(Mapping):
    """Read-only, case-insensitive mapping over one stored tuple."""

    __slots__ = ("_schema", "_values")

    def __init__(self, schema: Schema, values: tuple):
        self._schema = schema
        self._values = values

    def __getitem__(self, name):
        return self._values[self._schema.position(name)]

    def __iter__(self):
        return iter(self._schema.names)

    def __len__(self):
        return len(self._values)

    @property
    def row(self) -> tuple:
        return self._values


class Table:
    """Slot-addressed tuple store with optional hash indexes.

    Indexes map a column value to the list of live slots holding it. Columns in
    ``unique`` reject duplicates; ``not_null`` columns reject nulls.
    """

    def __init__(self, name: str, schema: Schema):
        self.name = name
        self.schema = schema
        self._rows: list[tuple | None] = []
        self._live = 0
        self._indexes: dict[int, dict[Any, list[int]]] = {}
        self.unique: set[int] = set()
        self.not_null: set[int] = set()

    def __len__(self):
        return self._live

    def __repr__(self):
        return f"<Table {self.name} rows={self._live}>"

    def get(self, slot: int) -> tuple | None:
        if 0 <= slot < len(self._rows):
            return self._rows[slot]
        return None

    def resolve(self, locator: TupleLocator) -> tuple | None:
        if locator.table.lower() != self.name.lower():
            return None
        return self.get(locator.slot)

    def locator(self, slot: int) -> TupleLocator:
        return TupleLocator(self.name, slot)

    def scan(self) -> Iterator[tuple[int, tuple]]:
        rows = self._rows
        for slot in range(len(rows)):
            row = rows[slot]
            if row is not None:
                yield slot, row

    def rows(self) -> Iterator[tuple]:
        for row in self._rows:
            if row is not None:
                yield row

    @property
    def high_water(self) -> int:
        return len(self._rows)

    # -- indexes -------------------------------------------------------------

    def has_index(self, col: int) -> bool:
        return col in self._indexes

    def ensure_index(self, col: int) -> dict[Any, list[int]]:
        index = self._indexes.get(col)
        if index is None:
            index = {}
            for slot, row in self.scan():
                value = row[col]
                if value is not None:
                    index.setdefault(value, []).append(slot)
            self._indexes[col] = index
        return index

    def add_unique(self, col: int) -> None:
        index = self.ensure_index(col)
        for value, slots in index.items():
            if len(slots) > 1:
                raise ConstraintError(
                    f"column {self.schema.columns[col].name!r} of {self.name} "
                    f"holds duplicate value {value!r}"
                )
        for _, row in self.scan():
            if row[col] is None:
                raise ConstraintError(
                    f"column {self.schema.columns[col].name!r} of {self.name} holds nulls"
                )
        self.unique.add(col)
        self.not_null.add(col)

    def lookup(self, col: int, value) -> int | None:
        slots = self.ensure_index(col).get(value)
        return slots[0] if slots else None

    # -- raw mutations (no hooks, no undo) -------------------------------------

    def _check(self, row: tuple, ignore_slot: int | None = None) -> None:
        for col in self.not_null:
            if row[col] is None:
                raise ConstraintError(
                    f"column {self.schema.columns[col].name!r} of {self.name} may not be null"
                )
        for col in self.unique:
            slots = self._indexes[col].get(row[col])
            if slots and (ignore_slot is None or slots[0] != ignore_slot):
                raise ConstraintError(
                    f"duplicate id {row[col]!r} in {self.name}.{self.schema.columns[col].name}"
                )

    def _index_add(self, slot: int, row: tuple) -> None:
        for col, index in self._indexes.items():
            value = row[col]
            if value is not None:
                index.setdefault(value, []).append(slot)

    def _index_remove(self, slot: int, row: tuple) -> None:
        for col, index in self._indexes.items():
            value = row[col]
            if value is None:
                continue
            slots = index.get(value)
            if slots is not None:
                slots.remove(slot)
                if not slots:
                    del index[value]

    def raw_insert(self, row: tuple) -> int:
        self._check(row)
        slot = len(self._rows)
        self._rows.append(row)
        self._live += 1
        self._index_add(slot, row)
        return slot

    def raw_delete(self, slot: int) -> tuple:
        row = self._rows[slot]
        self._index_remove(slot, row)
        self._rows[slot] = None
        self._live -= 1
        return row

    def raw_restore(self, slot: int, row: tuple) -> None:
        self._rows[slot] = row
        self._live += 1
        self._index_add(slot, row)

    def raw_update(self, slot: int, row: tuple) -> tuple:
        old = self._rows[slot]
        self._check(row, ignore_slot=slot)
        self._index_remove(slot, old)
        self._rows[slot] = row
        self._index_add(slot, row)
        return old


class _RWLock:
    """Many readers or one writer. Writers may re-enter."""

    def __init__(self):
        self._cond = threading.Condition(threading.Lock())
        self._readers = 0
        self._writer: int | None = None
        self._depth = 0

    @contextmanager
    def read(self):
        me = threading.get_ident()
        with self._cond:
            if self._writer == me:
                self._depth += 1
                reentrant = True
            else:
                reentrant = False
                while self._writer is not None:
                    self._cond.wait()
                self._readers += 1
        try:
            yield
        finally:
            with self._cond:
                if reentrant:
                    self._depth -= 1
                else:
                    self._readers -= 1
                    if self._readers == 0:
                        self._cond.notify_all()

    @contextmanager
    def write(self):
        me = threading.get_ident()
        with self._cond:
            if self._writer == me:
                self._depth += 1
            else:
                while self._writer is not None or self._readers:
                    self._cond.wait()
                self._writer = me
                self._depth = 1
        try:
            yield
        finally:
            with self._cond:
                self._depth -= 1
                if self._depth == 0:
                    self._writer = None
                    self._cond.notify_all()


Predicate = Callable[[RowView], bool] | Mapping[str, Any] | None


class Catalog:
    """Tables, graph views and the source hooks linking them.

    Graph views register themselves as hooks on their source tables; each hook
    object implements ``on_insert``, ``on_delete`` and ``on_update`` and a
    ``rebuild`` used to restore the topology after a rolled-back mutation.
    """

    def __init__(self):
        self.tables: dict[str, Table] = {}
        self.graph_views: dict[str, Any] = {}
        self.source_hooks: dict[str, list[Any]] = {}
        self.lock = _RWLock()
        self._undo: list[Callable[[], None]] | None = None
        self._touched: dict[int, Any] | None = None
        self.mutation_count = 0

    # -- lookup ----------------------------------------------------------------

    def table(self, name: str) -> Table:
        try:
            return self.tables[name.lower()]
        except KeyError:
            raise CatalogError(f"unknown table {name!r}") from None

    def has_table(self, name: str) -> bool:
        return name.lower() in self.tables

    def graph_view(self, name: str):
        try:
            return self.graph_views[name.lower()]
        except KeyError:
            raise CatalogError(f"unknown graph view {name!r}") from None

    def has_graph_view(self, name: str) -> bool:
        return name.lower() in self.graph_views

    def _resolve(self, table) -> Table:
        return table if isinstance(table, Table) else self.table(table)

    # -- DDL -------------------------------------------------------------------

    def create_table(self, name: str, schema) -> Table:
        if not isinstance(schema, Schema):
            schema = Schema(schema)
        with self.lock.write():
            key = name.lower()
            if key in self.tables or key in self.graph_views:
                raise CatalogError(f"{name!r} already exists")
            table = Table(name, schema)
            self.tables[key] = table
            return table

    def register_graph_view(self, view) -> None:
        key = view.name.lower()
        if key in self.graph_views or key in self.tables:
            raise CatalogError(f"{view.name!r} already exists")
        self.graph_views[key] = view
        for table_name in view.source_tables():
            hooks = self.source_hooks.setdefault(table_name.lower(), [])
            if view not in hooks:
                hooks.append(view)

    def hooks_for(self, table: Table) -> list:
        return self.source_hooks.get(table.name.lower(), [])

    # -- atomic mutation machinery ---------------------------------------------

    @contextmanager
    def atomic(self):
        """Group mutations; on error undo storage and rebuild touched views."""
        with self.lock.write():
            if self._undo is not None:
                yield
                return
            self._undo = []
            self._touched = {}
            try:
                yield
            except BaseException:
                undo, touched = self._undo, self._touched
                self._undo = self._touched = None
                for step in reversed(undo):
                    step()
                for view in touched.values():
                    view.rebuild()
                raise
            else:
                self._undo = self._touched = None

    def _fire(self, table: Table, event: str, *args) -> None:
        for hook in self.hooks_for(table):
            self._touched[id(hook)] = hook
            getattr(hook, event)(table, *args)

    # -- DML -------------------------------------------------------------------

    def insert_tuple(self, table, values) -> TupleLocator:
        table = self._resolve(table)
        row = table.schema.coerce(values)
        with self.atomic():
            slot = table.raw_insert(row)
            self._undo.append(lambda: table.raw_delete(slot))
            self._fire(table, "on_insert", slot, row)
            self.mutation_count += 1
        return table.locator(slot)

    def insert_many(self, table, rows) -> int:
        table = self._resolve(table)
        count = 0
        with self.atomic():
            for values in rows:
                self.insert_tuple(table, values)
                count += 1
        return count

    def _matcher(self, table: Table, predicate: Predicate) -> Callable[[tuple], bool]:
        schema = table.schema
        if predicate is None:
            return lambda row: True
        if isinstance(predicate, Mapping):
            checks = [(schema.position(k), v) for k, v in predicate.items()]
            return lambda row: all(
                row[i] is not None and v is not None and row[i] == v for i, v in checks
            )
        return lambda row: bool(predicate(RowView(schema, row)))

    def delete_where(self, table, predicate: Predicate = None) -> int:
        table = self._resolve(table)
        match = self._matcher(table, predicate)
        with self.atomic():
            victims = [slot for slot, row in table.scan() if match(row)]
            for slot in victims:
                self._delete_slot(table, slot)
        return len(victims)

    def delete_slot(self, table, slot: int) -> None:
        table = self._resolve(table)
        with self.atomic():
            self._delete_slot(table, slot)

    def _delete_slot(self, table: Table, slot: int) -> None:
        if table.get(slot) is None:
            return
        row = table.raw_delete(slot)
        self._undo.append(lambda: table.raw_restore(slot, row))
        self._fire(table, "on_delete", slot, row)
        self.mutation_count += 1

    def update_where(self, table, assignments, predicate: Predicate = None) -> int:
        """Apply ``assignments`` (column -> value or callable(RowView)) to matches."""
        table = self._resolve(table)
        schema = table.schema
        plan = [(schema.position(col), value) for col, value in assignments.items()]
        match = self._matcher(table, predicate)
        with self.atomic():
            targets = [(slot, row) for slot, row in table.scan() if match(row)]
            for slot, row in targets:
                new = list(row)
                view = RowView(schema, row)
                for pos, value in plan:
                    if callable(value):
                        value = value(view)
                    new[pos] = check_value(value, schema.columns[pos].type)
                self._update_slot(table, slot, tuple(new))
        return len(targets)

    def _update_slot(self, table: Table, slot: int, new: tuple) -> None:
        current = table.get(slot)
        if current is None or current == new:
            return
        old = table.raw_update(slot, new)
        self._undo.append(lambda: table.raw_update(slot, old))
        self._fire(table, "on_update", slot, old, new)
        self.mutation_count += 1

    def index_lookup(self, table, id_column: str, value) -> TupleLocator | None:
        table = self._resolve(table)
        col = table.schema.position(id_column)
        with self.lock.read():
            slot = table.lookup(col, value)
        return None if slot is None else table.locator(slot)

    def resolve(self, locator: TupleLocator) -> tuple | None:
        table = self.tables.get(locator.table.lower())
        return None if table is None else table.get(locator.slot)

    # -- ingestion ---------------------------------------------------------------

    def load_csv(self, table, path) -> int:
        """Load an RFC-4180 file whose header names the table's columns.

        All rows are parsed before the first insert, so a bad cell leaves the
        table untouched; constraint failures roll back through ``atomic``.
        """
        table = self._resolve(table)
        schema = table.schema
        if not os.path.exists(path):
            raise CsvLoadError(f"no such file: {path}")
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise CsvLoadError("empty file (missing header row)", 1) from None
            header = [h.strip() for h in header]
            if sorted(h.lower() for h in header) != sorted(n.lower() for n in schema.names):
                raise CsvLoadError(
                    f"header {header} does not match columns {schema.names}", 1
                )
            order = [schema.position(h) for h in header]
            types = [schema.columns[p].type for p in order]
            parsed = []
            for row in reader:
                line = reader.line_num
                if not row:
                    continue
                if len(row) != len(order):
                    raise CsvLoadError(f"expected {len(order)} cells, got {len(row)}", line)
                values: list[Any] = [None] * len(schema)
                for pos, ctype, cell in zip(order, types, row):
                    try:
                        values[pos] = parse_cell(cell, ctype)
                    except ValueError as exc:
                        raise CsvLoadError(str(exc), line) from None
                parsed.append(tuple(values))
        return self.insert_many(table, parsed)


_TRUE = {"true", "t", "1", "yes"}
_FALSE = {"false", "f", "0", "no"}


def parse_cell(cell: str, ctype: ColumnType):
    if cell == "":
        return None
    if ctype is ColumnType.TEXT:
        return cell
    text = cell.strip()
    try:
        if ctype is ColumnType.INTEGER:
            return int(text)
        if ctype is ColumnType.FLOAT:
            return float(text)
    except ValueError:
        raise ValueError(f"cannot parse {cell!r} as {ctype.value}") from None
    low = text.lower()
    if low in _TRUE:
        return True
    if low in _FALSE:
        return False
    raise ValueError(f"cannot parse {cell!r} as boolean")
