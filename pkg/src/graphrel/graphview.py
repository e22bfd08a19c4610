"""Materialized graph topology over relational sources.

A :class:`GraphView` keeps only identifiers, adjacency and one tuple locator
(slot) per vertex and edge. Attribute values stay in the source tables and are
read through the locator when a query asks for them, so attribute updates never
touch the topology.

The governing maintenance contract: after any sequence of source mutations the
topology equals what :meth:`GraphView.rebuild` would produce from the mutated
sources. Edges whose endpoints are missing are parked as *dangling* and
promoted again as soon as both endpoints exist.
"""

from __future__ import annotations

import gc
import sys
from dataclasses import dataclass
from typing import Callable, Iterator

from .errors import CatalogError, ConstraintError, QueryError
from .sql.ast import GraphViewDef
from .storage import Catalog, ColumnType, Table, TupleLocator


class VertexRecord:
    __slots__ = ("id", "slot", "out_edges", "in_edges")

    def __init__(self, vid: int, slot: int):
        self.id = vid
        self.slot = slot
        self.out_edges: list[EdgeRecord] = []
        self.in_edges: list[EdgeRecord] = []

    @property
    def fan_out(self) -> int:
        return len(self.out_edges)

    @property
    def fan_in(self) -> int:
        return len(self.in_edges)

    @property
    def out_edge_ids(self) -> list[int]:
        return [e.id for e in self.out_edges]

    @property
    def in_edge_ids(self) -> list[int]:
        return [e.id for e in self.in_edges]

    def __repr__(self):
        return f"VertexRecord(id={self.id}, fan_out={self.fan_out}, fan_in={self.fan_in})"


class EdgeRecord:
    __slots__ = ("id", "src", "dst", "slot")

    def __init__(self, eid: int, src: int, dst: int, slot: int):
        self.id = eid
        self.src = src
        self.dst = dst
        self.slot = slot

    # graph-view rows expose the stored direction as From/To
    @property
    def from_id(self) -> int:
        return self.src

    @property
    def to_id(self) -> int:
        return self.dst

    def __repr__(self):
        return f"EdgeRecord(id={self.id}, {self.src}->{self.dst})"


@dataclass(frozen=True)
class GraphStats:
    avg_fan_out: float
    vertex_count: int
    arc_count: int


RowFilter = Callable[[tuple], bool]


def _integer_column(table: Table, name: str, role: str) -> int:
    pos = table.schema.find(name)
    if pos is None:
        raise CatalogError(f"unknown column {name!r} in {table.name} ({role} binding)")
    if table.schema.columns[pos].type is not ColumnType.INTEGER:
        raise CatalogError(f"{role} column {table.name}.{name} must be integer-typed")
    return pos


class GraphShape:
    """Source tables and attribute resolution of a graph definition.

    Shared by registered views and the per-query temporary graphs, which are
    bound before any topology exists.
    """

    def __init__(self, definition: GraphViewDef, catalog: Catalog):
        self.definition = definition
        self.name = definition.name
        self.directed = definition.directed
        self.catalog = catalog
        vs, es = definition.vertexes, definition.edges
        self.vertex_table = catalog.table(vs.table)
        self.edge_table = catalog.table(es.table)
        self.vid_col = _integer_column(self.vertex_table, vs.id_col, "vertex ID")
        self.eid_col = _integer_column(self.edge_table, es.id_col, "edge ID")
        self.from_col = _integer_column(self.edge_table, es.from_col, "edge FROM")
        self.to_col = _integer_column(self.edge_table, es.to_col, "edge TO")
        self.vertex_attrs = self._attr_map(self.vertex_table, vs.attrs, vs.id_col)
        self.edge_attrs = self._attr_map(self.edge_table, es.attrs, es.id_col)

    @staticmethod
    def _attr_map(table: Table, attrs, id_col: str) -> dict[str, tuple[str, int]]:
        out = {"id": ("Id", table.schema.position(id_col))}
        for alias, column in attrs:
            key = alias.lower()
            if key in out and key != "id":
                raise CatalogError(f"duplicate attribute alias {alias!r}")
            out[key] = (alias, table.schema.position(column))
        return out

    def vertex_attribute(self, name: str) -> int | None:
        """Column position for a vertex attribute; declared aliases win."""
        hit = self.vertex_attrs.get(name.lower())
        if hit is not None:
            return hit[1]
        return self.vertex_table.schema.find(name)

    def edge_attribute(self, name: str) -> int | None:
        hit = self.edge_attrs.get(name.lower())
        if hit is not None:
            return hit[1]
        return self.edge_table.schema.find(name)

    def declared_vertex_attributes(self) -> list[tuple[str, int]]:
        return [v for k, v in self.vertex_attrs.items() if k != "id"]

    def declared_edge_attributes(self) -> list[tuple[str, int]]:
        return [v for k, v in self.edge_attrs.items() if k != "id"]


class GraphView(GraphShape):
    """Singleton topology of one graph view (or a query-local temporary one)."""

    def __init__(
        self,
        definition: GraphViewDef,
        catalog: Catalog,
        vertex_filter: RowFilter | None = None,
        edge_filter: RowFilter | None = None,
        temporary: bool = False,
    ):
        super().__init__(definition, catalog)
        self.temporary = temporary
        self.vertex_filter = vertex_filter
        self.edge_filter = edge_filter
        self.vertices: dict[int, VertexRecord] = {}
        self.edges: dict[int, EdgeRecord] = {}
        self.dangling: dict[int, tuple[int | None, int | None, int]] = {}
        self._waiting: dict[int, dict[int, None]] = {}
        self._arcs = 0
        self.stats: GraphStats | None = None
        self.build_count = 0
        self.rebuild()

    def __repr__(self):
        kind = "directed" if self.directed else "undirected"
        return f"<GraphView {self.name} {kind} |V|={len(self.vertices)} |E|={len(self.edges)}>"

    def source_tables(self) -> list[str]:
        names = [self.vertex_table.name]
        if self.edge_table.name.lower() != self.vertex_table.name.lower():
            names.append(self.edge_table.name)
        return names

    def vertex_values(self, rec: VertexRecord) -> tuple:
        return self.vertex_table._rows[rec.slot]

    def edge_values(self, rec: EdgeRecord) -> tuple:
        return self.edge_table._rows[rec.slot]

    def vertex_locator(self, rec: VertexRecord) -> TupleLocator:
        return self.vertex_table.locator(rec.slot)

    def edge_locator(self, rec: EdgeRecord) -> TupleLocator:
        return self.edge_table.locator(rec.slot)

    # -- lookup -------------------------------------------------------------------

    def vertex_by_id(self, vid) -> VertexRecord | None:
        return self.vertices.get(vid)

    def edge_by_id(self, eid) -> EdgeRecord | None:
        return self.edges.get(eid)

    def steps(self, rec: VertexRecord) -> Iterator[tuple[EdgeRecord, int]]:
        """Traversable (edge, neighbour) pairs leaving ``rec`` in adjacency order."""
        vid = rec.id
        if self.directed:
            for e in rec.out_edges:
                yield e, e.dst
        else:
            for e in rec.out_edges:
                yield e, (e.dst if e.src == vid else e.src)

    # -- construction ---------------------------------------------------------------

    def rebuild(self) -> None:
        """One pass over the vertex source, then one over the edge source."""
        self.vertices = {}
        self.edges = {}
        self.dangling = {}
        self._waiting = {}
        self._arcs = 0
        self.build_count += 1
        vfilter, efilter = self.vertex_filter, self.edge_filter
        vid_col = self.vid_col
        eid_col, from_col, to_col = self.eid_col, self.from_col, self.to_col
        vertices = self.vertices
        gc_was_enabled = gc.isenabled()
        gc.disable()
        try:
            for slot, row in self.vertex_table.scan():
                if vfilter is not None and not vfilter(row):
                    continue
                vid = row[vid_col]
                if vid is None:
                    raise QueryError(f"null vertex id in {self.vertex_table.name}")
                if vid in vertices:
                    raise QueryError(f"duplicate vertex id {vid} in graph {self.name}")
                vertices[vid] = VertexRecord(vid, slot)
            for slot, row in self.edge_table.scan():
                if efilter is not None and not efilter(row):
                    continue
                eid = row[eid_col]
                if eid is None:
                    raise QueryError(f"null edge id in {self.edge_table.name}")
                if eid in self.edges or eid in self.dangling:
                    raise QueryError(f"duplicate edge id {eid} in graph {self.name}")
                self._place_edge(eid, row[from_col], row[to_col], slot)
        finally:
            if gc_was_enabled:
                gc.enable()

    def _place_edge(self, eid, src, dst, slot) -> None:
        vertices = self.vertices
        a = vertices.get(src) if src is not None else None
        b = vertices.get(dst) if dst is not None else None
        if a is None or b is None:
            self._park(eid, src, dst, slot)
            return
        rec = EdgeRecord(eid, src, dst, slot)
        self.edges[eid] = rec
        a.out_edges.append(rec)
        b.in_edges.append(rec)
        self._arcs += 1
        if not self.directed and a is not b:
            b.out_edges.append(rec)
            a.in_edges.append(rec)
            self._arcs += 1

    # -- topology primitives used by maintenance ---------------------------------------

    def _add_vertex(self, vid: int, slot: int) -> None:
        if vid in self.vertices:
            raise QueryError(f"duplicate vertex id {vid} in graph {self.name}")
        self.vertices[vid] = VertexRecord(vid, slot)
        waiting = self._waiting.get(vid)
        if not waiting:
            return
        for eid in list(waiting):
            src, dst, eslot = self.dangling[eid]
            if src in self.vertices and dst in self.vertices:
                self._unpark(eid)
                self._place_edge(eid, src, dst, eslot)

    def _remove_vertex(self, vid: int) -> None:
        rec = self.vertices.get(vid)
        if rec is None:
            return
        incident = {e.id: e for e in rec.out_edges}
        incident.update((e.id, e) for e in rec.in_edges)
        for e in incident.values():
            self._detach_edge(e)
        del self.vertices[vid]
        for e in incident.values():
            self._park(e.id, e.src, e.dst, e.slot)

    def _park(self, eid, src, dst, slot) -> None:
        # every dangling edge is indexed under both endpoints, present or not
        self.dangling[eid] = (src, dst, slot)
        for vid in (src, dst):
            if vid is not None:
                self._waiting.setdefault(vid, {})[eid] = None

    def _unpark(self, eid) -> None:
        parked = self.dangling.pop(eid)
        for vid in parked[:2]:
            pending = self._waiting.get(vid)
            if pending is not None:
                pending.pop(eid, None)
                if not pending:
                    del self._waiting[vid]

    def _detach_edge(self, e: EdgeRecord) -> None:
        del self.edges[e.id]
        a = self.vertices[e.src]
        b = self.vertices[e.dst]
        a.out_edges.remove(e)
        b.in_edges.remove(e)
        self._arcs -= 1
        if not self.directed and a is not b:
            b.out_edges.remove(e)
            a.in_edges.remove(e)
            self._arcs -= 1

    def _add_edge(self, eid, src, dst, slot) -> None:
        if eid in self.edges or eid in self.dangling:
            raise QueryError(f"duplicate edge id {eid} in graph {self.name}")
        self._place_edge(eid, src, dst, slot)

    def _remove_edge(self, eid) -> None:
        rec = self.edges.get(eid)
        if rec is not None:
            self._detach_edge(rec)
        elif eid in self.dangling:
            self._unpark(eid)

    # -- source hooks ---------------------------------------------------------------------

    def _vertex_member(self, row) -> bool:
        return self.vertex_filter is None or bool(self.vertex_filter(row))

    def _edge_member(self, row) -> bool:
        return self.edge_filter is None or bool(self.edge_filter(row))

    def on_insert(self, table: Table, slot: int, row: tuple) -> None:
        if table is self.vertex_table and self._vertex_member(row):
            self._add_vertex(row[self.vid_col], slot)
        if table is self.edge_table and self._edge_member(row):
            self._add_edge(row[self.eid_col], row[self.from_col], row[self.to_col], slot)

    def on_delete(self, table: Table, slot: int, row: tuple) -> None:
        if table is self.edge_table:
            eid = row[self.eid_col]
            rec = self.edges.get(eid)
            if (rec is not None and rec.slot == slot) or (
                eid in self.dangling and self.dangling[eid][2] == slot
            ):
                self._remove_edge(eid)
        if table is self.vertex_table:
            rec = self.vertices.get(row[self.vid_col])
            if rec is not None and rec.slot == slot:
                self._remove_vertex(rec.id)

    def on_update(self, table: Table, slot: int, old: tuple, new: tuple) -> None:
        if table is self.vertex_table:
            old_id, new_id = old[self.vid_col], new[self.vid_col]
            was, now = self._vertex_member(old), self._vertex_member(new)
            if not (was == now and (not was or old_id == new_id)):
                if was:
                    self._remove_vertex(old_id)
                if now:
                    self._add_vertex(new_id, slot)
            if old_id != new_id and not self.temporary:
                self._cascade_vertex_id(old_id, new_id)
        if table is self.edge_table:
            keys = (self.eid_col, self.from_col, self.to_col)
            was, now = self._edge_member(old), self._edge_member(new)
            same = all(old[k] == new[k] for k in keys)
            if not (was == now and (not was or same)):
                if was:
                    self._remove_edge(old[self.eid_col])
                if now:
                    self._add_edge(new[self.eid_col], new[self.from_col], new[self.to_col], slot)

    def _cascade_vertex_id(self, old_id: int, new_id: int) -> None:
        """Keep the edges source referring to a renamed vertex."""
        names = self.edge_table.schema.columns
        for col in (self.from_col, self.to_col):
            self.catalog.update_where(
                self.edge_table, {names[col].name: new_id}, {names[col].name: old_id}
            )

    # -- statistics and inspection ----------------------------------------------------------

    def compute_stats(self) -> GraphStats:
        n = len(self.vertices)
        self.stats = GraphStats(self._arcs / n if n else 0.0, n, self._arcs)
        return self.stats

    @property
    def arc_count(self) -> int:
        return self._arcs

    def snapshot(self):
        """Id-level topology fingerprint used by the maintenance-equivalence checks."""
        adjacency = {
            vid: (tuple(sorted(e.id for e in rec.out_edges)), tuple(sorted(e.id for e in rec.in_edges)))
            for vid, rec in self.vertices.items()
        }
        edges = tuple(sorted((e.id, e.src, e.dst) for e in self.edges.values()))
        return (frozenset(self.vertices), edges, adjacency, tuple(sorted(self.dangling)))

    def topology_bytes(self) -> int:
        """Approximate footprint of the topology objects (never the attribute tuples)."""
        size = sys.getsizeof(self.vertices) + sys.getsizeof(self.edges)
        size += sys.getsizeof(self.dangling) + sys.getsizeof(self._waiting)
        for rec in self.vertices.values():
            size += sys.getsizeof(rec) + sys.getsizeof(rec.out_edges) + sys.getsizeof(rec.in_edges)
        for rec in self.edges.values():
            size += sys.getsizeof(rec)
        return size


def build(definition: GraphViewDef, catalog: Catalog) -> GraphView:
    """Materialize a graph view from its definition (filters compiled here)."""
    from .executor.expressions import source_filter

    vfilter = source_filter(definition.vertexes, catalog)
    efilter = source_filter(definition.edges, catalog)
    return GraphView(definition, catalog, vfilter, efilter)


def vertex_by_id(view: GraphView, vid) -> VertexRecord | None:
    return view.vertex_by_id(vid)


def edge_by_id(view: GraphView, eid) -> EdgeRecord | None:
    return view.edge_by_id(eid)


def compute_stats(view: GraphView) -> GraphStats:
    return view.compute_stats()


class PathValue:
    """A path stored as a parent-linked chain of (edge, end vertex) steps.

    Extending a path allocates one node and shares the prefix, which keeps
    breadth-first frontiers cheap. ``edges`` and ``vertexes`` materialize the
    id lists on first use.
    """

    __slots__ = ("view", "parent", "edge", "end", "length", "start", "_edges", "_vertexes")

    def __init__(self, view, parent, edge, end, length, start):
        self.view = view
        self.parent = parent
        self.edge = edge
        self.end = end
        self.length = length
        self.start = start
        self._edges = None
        self._vertexes = None

    @classmethod
    def seed(cls, view, vertex_id) -> "PathValue":
        return cls(view, None, None, vertex_id, 0, vertex_id)

    @classmethod
    def from_edges(cls, view, start, edge_ids) -> "PathValue":
        """Rebuild a path from a start vertex and its edge ids (test helper)."""
        path = cls.seed(view, start)
        for eid in edge_ids:
            rec = view.edges[eid]
            if rec.src == path.end:
                nxt = rec.dst
            elif not view.directed and rec.dst == path.end:
                nxt = rec.src
            else:
                raise QueryError(f"edge {eid} does not continue the path at vertex {path.end}")
            path = path.extend(rec, nxt)
        return path

    def extend(self, edge: EdgeRecord, vertex_id) -> "PathValue":
        return PathValue(self.view, self, edge, vertex_id, self.length + 1, self.start)

    def _materialize(self):
        recs = []
        verts = []
        node = self
        while node.parent is not None:
            recs.append(node.edge)
            verts.append(node.end)
            node = node.parent
        verts.append(node.end)
        recs.reverse()
        verts.reverse()
        self._edges = tuple(recs)
        self._vertexes = tuple(verts)

    @property
    def edge_records(self) -> tuple[EdgeRecord, ...]:
        if self._edges is None:
            self._materialize()
        return self._edges

    @property
    def edges(self) -> tuple[int, ...]:
        return tuple(e.id for e in self.edge_records)

    @property
    def vertexes(self) -> tuple[int, ...]:
        if self._vertexes is None:
            self._materialize()
        return self._vertexes

    @property
    def start_vertex(self):
        return self.start

    @property
    def end_vertex(self):
        return self.end

    def visits(self, vid) -> bool:
        node = self
        while node is not None:
            if node.end == vid:
                return True
            node = node.parent
        return False

    @property
    def key(self):
        return (self.vertexes, self.edges)

    def __eq__(self, other):
        return isinstance(other, PathValue) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __len__(self):
        return self.length

    def __repr__(self):
        return f"PathValue({path_string(self.view, self)})"


def path_string(view, path: PathValue) -> str:
    """``"1 -e1-> 2 -e2-> 3"``: vertex ids joined by edge ids."""
    verts = path.vertexes
    parts = [str(verts[0])]
    for eid, vid in zip(path.edges, verts[1:]):
        parts.append(f"-e{eid}-> {vid}")
    return " ".join(parts)


def ensure_source_constraints(view: GraphView) -> None:
    """Graph-source id columns are unique and non-null from creation on."""
    try:
        view.vertex_table.add_unique(view.vid_col)
        view.edge_table.add_unique(view.eid_col)
    except ConstraintError as exc:
        raise ConstraintError(f"cannot create graph view {view.name}: {exc}") from None
