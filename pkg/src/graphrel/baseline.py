"""Competing evaluation strategies and a brute-force path oracle.

``join_reachability`` and ``grail_sssp`` traverse a graph stored in an edge
table the way a purely relational engine would: one join of a frontier
relation with the edge table per step, built from the engine's own
relational operators. ``brute_force_paths`` enumerates paths without any of
the traversal code and serves as the test oracle for the path scans.
"""

from __future__ import annotations

from typing import Callable

from .errors import EngineError, QueryError
from .executor.operators import Filter, NestedLoopJoin, Operator, Project, TableScan
from .graphview import GraphView, PathValue
from .storage import Table


class RowsScan(Operator):
    """Scan over an in-memory relation (the frontier table)."""

    name = "RowsScan"

    def __init__(self, rows: list[tuple], description: str = "frontier"):
        super().__init__()
        self.data = rows
        self.description = description

    def rows(self):
        yield from self.data

    def label(self) -> str:
        return f"RowsScan({self.description}, {len(self.data)} rows)"


def _edge_source(table: Table, edge_filter: Callable[[tuple], bool] | None) -> Operator:
    op: Operator = TableScan(table, table.name)
    if edge_filter is not None:
        op = Filter(op, lambda r: edge_filter(r[0]), "edge filter")
    return op


def _step(table: Table, frontier: list[tuple], key: int, out: int, edge_filter) -> Operator:
    """frontier(v) JOIN edges ON edges[key] = v, projected to edges[out]."""
    join = NestedLoopJoin(
        _edge_source(table, edge_filter),
        RowsScan(frontier),
        outer_keys=[lambda r: r[0][key]],
        inner_keys=[lambda r: r[0]],
        text=f"{table.schema.columns[key].name} = frontier.v",
    )
    return Project(join, [lambda r: r[0][out]], [table.schema.columns[out].name])


def join_reachability(
    table: Table,
    src,
    dst,
    max_depth: int,
    from_col: str = "src",
    to_col: str = "dst",
    directed: bool = True,
    dedup: bool = True,
    edge_filter: Callable[[tuple], bool] | None = None,
) -> bool:
    """True iff ``dst`` is reachable from ``src`` within ``max_depth`` joins.

    Each round joins the current frontier relation with the edge table. With
    ``dedup`` the frontier keeps each vertex once and drops vertices reached
    in earlier rounds; without it the frontier is a bag of every walk end.
    ``src == dst`` is reachable at depth 0.
    """
    if src == dst:
        return True
    if max_depth < 1:
        return False
    f = table.schema.position(from_col)
    t = table.schema.position(to_col)
    directions = [(f, t)] if directed else [(f, t), (t, f)]
    seen = {src}
    frontier = [(src,)]
    for _ in range(max_depth):
        if not frontier:
            return False
        reached = []
        for key, out in directions:
            reached.extend(r[0] for r in _step(table, frontier, key, out, edge_filter).rows())
        if dst in reached:
            return True
        if dedup:
            fresh = []
            for v in reached:
                if v not in seen:
                    seen.add(v)
                    fresh.append((v,))
            frontier = fresh
        else:
            frontier = [(v,) for v in reached if v is not None]
    return False


def grail_sssp(
    table: Table,
    weight_col: str,
    src,
    from_col: str = "src",
    to_col: str = "dst",
    directed: bool = True,
    edge_filter: Callable[[tuple], bool] | None = None,
) -> dict:
    """Set-at-a-time single-source shortest distances.

    Every round joins the vertexes whose distance changed in the previous
    round with the edge table, keeps the minimum candidate per reached vertex
    and merges improvements, until a round changes nothing.
    """
    f = table.schema.position(from_col)
    t = table.schema.position(to_col)
    w = table.schema.position(weight_col)
    for _, row in table.scan():
        if edge_filter is not None and not edge_filter(row):
            continue
        if row[w] is None:
            raise QueryError(f"edge row {row} has a null weight")
        if row[w] < 0:
            raise QueryError(f"edge row {row} has negative weight {row[w]}")
    directions = [(f, t)] if directed else [(f, t), (t, f)]
    dist = {src: 0}
    changed = [(src, 0)]
    while changed:
        candidates: dict = {}
        for key, out in directions:
            join = NestedLoopJoin(
                _edge_source(table, edge_filter),
                RowsScan(changed),
                outer_keys=[lambda r: r[0][key]],
                inner_keys=[lambda r: r[0]],
            )
            step = Project(join, [lambda r: r[0][out], lambda r: r[2] + r[0][w]], ["v", "d"])
            for v, d in step.rows():
                if v not in candidates or d < candidates[v]:
                    candidates[v] = d
        changed = []
        for v, d in candidates.items():
            if v not in dist or d < dist[v]:
                dist[v] = d
                changed.append((v, d))
    return dist


# -- brute-force path oracle ---------------------------------------------------------------


BRUTE_FORCE_LIMIT = 16


def brute_force_paths(view: GraphView, constraints) -> list[PathValue]:
    """Every path the constraints accept, by exhaustive edge-sequence search.

    Shares no code with the scans: continuations are found by looking at every
    edge of the view, and accepted paths obey the same rule (no repeated
    vertex except a final return to the start, no repeated edge id).
    """
    if len(view.vertices) > BRUTE_FORCE_LIMIT:
        raise EngineError(
            f"brute force enumeration is limited to {BRUTE_FORCE_LIMIT} vertexes, got {len(view.vertices)}"
        )
    c = constraints
    lo, hi = c.lo, c.hi
    if c.seeds is None:
        seeds = list(view.vertices)
    else:
        seeds = [s for s in dict.fromkeys(c.seeds) if s in view.vertices]
    all_edges = list(view.edges.values())
    found: list[PathValue] = []

    def moves(v):
        for e in all_edges:
            if e.src == v:
                yield e, e.dst
            if not view.directed and e.dst == v and e.src != e.dst:
                yield e, e.src

    def consider(verts, eids):
        if len(eids) < lo or len(eids) > hi:
            return
        if c.target is not None and verts[-1] != c.target:
            return
        path = PathValue.seed(view, verts[0])
        for eid, v in zip(eids, verts[1:]):
            path = path.extend(view.edges[eid], v)
        if all(fn(path) for fn in c.accept):
            found.append(path)

    def walk(verts, eids):
        if eids:
            consider(verts, eids)
        if len(eids) >= hi:
            return
        if len(verts) > 1 and verts[-1] == verts[0]:
            return
        for e, n in moves(verts[-1]):
            if e.id in eids:
                continue
            if n in verts and n != verts[0]:
                continue
            walk(verts + [n], eids + [e.id])

    for s in seeds:
        walk([s], [])
    return found

