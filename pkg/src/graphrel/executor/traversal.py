"""Path enumeration over a graph view: depth-first, breadth-first, shortest.

All three scans produce :class:`PathValue` streams lazily. Paths are simple
except that the final vertex may close back onto the start vertex; a closed
path is never extended. Edge ids never repeat within a path.

Pruning hooks (``TraversalConstraints``) only ever discard partial paths that
no extension could turn into an accepted path. Every emitted path is checked
again in full by ``accept``.
"""

from __future__ import annotations

import heapq
import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

from ..errors import QueryError
from ..graphview import EdgeRecord, GraphView, PathValue

INF = math.inf

PathCheck = Callable[[PathValue], bool]


@dataclass
class Counters:
    expansions: int = 0
    paths_emitted: int = 0
    tempgraph_builds: int = 0

    def reset(self) -> None:
        self.expansions = self.paths_emitted = self.tempgraph_builds = 0


@dataclass
class TraversalConstraints:
    """Everything a path scan needs to know about the paths it should produce.

    ``edge_checks`` and ``vertex_checks`` hold ``(lo, hi, fn)`` triples:
    ``fn(path)`` judges the newest edge (position ``length - 1``) or vertex
    (position ``length``) and is consulted when that position lies in
    ``[lo, hi]``. ``positional`` maps a depth to checks that become decidable
    once the partial path reaches it. ``monotone`` checks return False when no
    extension can recover. ``edge_filter``/``vertex_filter`` restrict the
    traversable sub-graph of shortest-path scans; the other scans only use
    them to bound the remaining distance to a target.
    """

    lo: int = 1
    hi: float = INF
    seeds: Sequence | None = None
    target: object = None
    accept: list[PathCheck] = field(default_factory=list)
    positional: dict[int, list[PathCheck]] = field(default_factory=dict)
    edge_checks: list[tuple[int, float, PathCheck]] = field(default_factory=list)
    vertex_checks: list[tuple[int, float, PathCheck]] = field(default_factory=list)
    monotone: list[PathCheck] = field(default_factory=list)
    edge_filter: Callable[[GraphView, EdgeRecord], bool] | None = None
    vertex_filter: Callable[[GraphView, object], bool] | None = None
    prune: bool = True
    goal_directed: bool = True

    @property
    def empty(self) -> bool:
        return self.lo > self.hi

    @property
    def has_pruning(self) -> bool:
        return self.prune and bool(
            self.positional or self.edge_checks or self.vertex_checks or self.monotone
        )

    def seed_ok(self, root: PathValue) -> bool:
        if not self.prune:
            return True
        for lo, hi, fn in self.vertex_checks:
            if lo == 0 and not fn(root):
                return False
        for fn in self.positional.get(0, ()):
            if not fn(root):
                return False
        return True

    def step_ok(self, path: PathValue) -> bool:
        length = path.length
        k = length - 1
        for lo, hi, fn in self.edge_checks:
            if lo <= k <= hi and not fn(path):
                return False
        for lo, hi, fn in self.vertex_checks:
            if lo <= length <= hi and not fn(path):
                return False
        for fn in self.positional.get(length, ()):
            if not fn(path):
                return False
        for fn in self.monotone:
            if not fn(path):
                return False
        return True

    def accepts(self, path: PathValue) -> bool:
        if path.length < self.lo or path.length > self.hi:
            return False
        if self.target is not None and path.end != self.target:
            return False
        for fn in self.accept:
            if not fn(path):
                return False
        return True


def seed_ids(view: GraphView, c: TraversalConstraints) -> Iterator:
    if c.seeds is None:
        yield from list(view.vertices)
        return
    seen = set()
    for s in c.seeds:
        if s in view.vertices and s not in seen:
            seen.add(s)
            yield s


def _steps(view: GraphView, vid) -> list[tuple[EdgeRecord, object]]:
    rec = view.vertices[vid]
    if view.directed:
        return [(e, e.dst) for e in rec.out_edges]
    return [(e, e.dst if e.src == vid else e.src) for e in rec.out_edges]


def _lower_bounds(view: GraphView, c: TraversalConstraints, budget: int):
    """Ball of exact distances around the target, grown against the seeds.

    Returns ``lb(vid)``: a lower bound on the number of edges any path still
    needs from ``vid`` to the target (infinite when it cannot get there).
    The ball only ever holds complete distance levels, so every vertex outside
    it is at least one level further away. When seeds are known a forward
    search grows from them in turn, expanding the smaller frontier, and both
    stop as soon as they meet.
    """
    target = c.target
    if target not in view.vertices:
        return lambda v: INF
    edge_ok = c.edge_filter if c.prune else None
    vertex_ok = c.vertex_filter if c.prune else None
    directed = view.directed
    vertices = view.vertices

    def level(frontier, seen, backward, value):
        nxt = []
        for v in frontier:
            rec = vertices[v]
            for e in (rec.in_edges if backward and directed else rec.out_edges):
                if directed:
                    u = e.src if backward else e.dst
                else:
                    u = e.dst if e.src == v else e.src
                if u in seen:
                    continue
                if edge_ok is not None and not edge_ok(view, e):
                    continue
                if vertex_ok is not None and not vertex_ok(view, u):
                    continue
                seen[u] = value
                nxt.append(u)
        return nxt

    dist = {target: 0}
    back = [target]
    radius = 0
    fwd_seen = None
    if c.seeds is not None:
        fwd_seen = {s: 0 for s in c.seeds if s in vertices}
    fwd = list(fwd_seen or ())
    met = fwd_seen is not None and target in fwd_seen
    fwd_radius = 0
    while back and len(dist) < budget and radius < c.hi and not met:
        if fwd_seen is not None:
            if not fwd or radius + fwd_radius >= c.hi:
                # no seed reaches the target within the length bound
                return lambda v: INF
            if len(fwd) < len(back):
                fwd = level(fwd, fwd_seen, False, 0)
                fwd_radius += 1
                met = any(v in dist for v in fwd)
                continue
        back = level(back, dist, True, radius + 1)
        radius += 1
        if fwd_seen is not None:
            met = any(v in fwd_seen for v in back)
    outside = INF if not back else radius + 1
    get = dist.get
    return lambda v: get(v, outside)


def _ball_budget(view: GraphView) -> int:
    return max(64, 4 * int(math.sqrt(max(1, len(view.edges)))))


def dfs_scan(view: GraphView, c: TraversalConstraints, counters: Counters | None = None) -> Iterator[PathValue]:
    """Depth-first enumeration, shallow-to-deep along each branch."""
    if c.empty:
        return
    counters = counters if counters is not None else Counters()
    hi, lo = c.hi, c.lo
    prune = c.has_pruning
    step_ok, accepts = c.step_ok, c.accepts
    target = c.target
    lb = None
    if c.goal_directed and c.target is not None:
        lb = _lower_bounds(view, c, _ball_budget(view))
    for s in seed_ids(view, c):
        root = PathValue.seed(view, s)
        if not c.seed_ok(root):
            continue
        if lb is not None and lb(s) > hi:
            continue
        on_path = {s}
        stack = [iter(_steps(view, s))]
        chain = [root]
        while stack:
            nxt = next(stack[-1], None)
            if nxt is None:
                stack.pop()
                on_path.discard(chain.pop().end)
                continue
            path = chain[-1]
            e, n = nxt
            closing = n == s
            if closing:
                if path.edge is e:
                    continue
            elif n in on_path:
                continue
            child = path.extend(e, n)
            counters.expansions += 1
            if prune and not step_ok(child):
                continue
            if lb is not None and child.length + lb(n) > hi:
                continue
            if child.length >= lo and accepts(child):
                counters.paths_emitted += 1
                yield child
            if not closing and child.length < hi and n != target:
                on_path.add(n)
                chain.append(child)
                stack.append(iter(_steps(view, n)))


def bfs_scan(view: GraphView, c: TraversalConstraints, counters: Counters | None = None) -> Iterator[PathValue]:
    """Breadth-first enumeration: emitted lengths never decrease.

    With a known target the frontier is ordered by length plus a lower bound on
    the remaining distance, so goal paths still come out shortest first while
    hopeless branches are never expanded.
    """
    if c.empty:
        return
    counters = counters if counters is not None else Counters()
    if c.goal_directed and c.target is not None:
        yield from _goal_bfs(view, c, counters)
        return
    hi, lo = c.hi, c.lo
    prune = c.has_pruning
    step_ok, accepts = c.step_ok, c.accepts
    queue: deque[PathValue] = deque()
    for s in seed_ids(view, c):
        root = PathValue.seed(view, s)
        if c.seed_ok(root):
            queue.append(root)
    while queue:
        path = queue.popleft()
        s = path.start
        for e, n in _steps(view, path.end):
            closing = n == s
            if closing:
                if path.edge is e:
                    continue
            elif path.visits(n):
                continue
            child = path.extend(e, n)
            counters.expansions += 1
            if prune and not step_ok(child):
                continue
            if child.length >= lo and accepts(child):
                counters.paths_emitted += 1
                yield child
            if not closing and child.length < hi:
                queue.append(child)


def _goal_bfs(view: GraphView, c: TraversalConstraints, counters: Counters) -> Iterator[PathValue]:
    hi, lo = c.hi, c.lo
    target = c.target
    prune = c.has_pruning
    step_ok, accepts = c.step_ok, c.accepts
    lb = _lower_bounds(view, c, _ball_budget(view))
    heap: list = []
    tie = itertools.count()
    for s in seed_ids(view, c):
        root = PathValue.seed(view, s)
        f = lb(s)
        if f <= hi and c.seed_ok(root):
            heap.append((f, 0, next(tie), root))
    heapq.heapify(heap)
    while heap:
        _, _, _, path = heapq.heappop(heap)
        if path.length and path.end == target:
            if path.length >= lo and accepts(path):
                counters.paths_emitted += 1
                yield path
            continue
        s = path.start
        for e, n in _steps(view, path.end):
            closing = n == s
            if closing:
                if path.edge is e:
                    continue
            elif path.visits(n):
                continue
            if closing and n != target:
                continue
            f = path.length + 1 + lb(n)
            if f > hi:
                continue
            child = path.extend(e, n)
            counters.expansions += 1
            if prune and not step_ok(child):
                continue
            # deeper paths first among equal estimates: the bound is
            # consistent, so goal paths still leave in length order
            heapq.heappush(heap, (f, -child.length, next(tie), child))


# -- shortest paths ------------------------------------------------------------------------


def _weight_fn(view: GraphView, pos: int):
    rows = view.edge_table._rows

    def weight(e: EdgeRecord) -> float:
        w = rows[e.slot][pos]
        if w is None:
            raise QueryError(f"edge {e.id} has a null weight")
        if w < 0:
            raise QueryError(f"edge {e.id} has negative weight {w}")
        return w

    return weight


def _sub_steps(view: GraphView, c: TraversalConstraints):
    # the filters define the sub-graph a shortest-path scan runs on, so they
    # apply whether or not pruning is enabled
    edge_ok = c.edge_filter
    vertex_ok = c.vertex_filter

    def steps(vid):
        for e, n in _steps(view, vid):
            if edge_ok is not None and not edge_ok(view, e):
                continue
            if vertex_ok is not None and not vertex_ok(view, n):
                continue
            yield e, n

    return steps


def _dijkstra(steps, weight, src, dst, banned_edges, banned_vertices, counters):
    """Single-pair Dijkstra; returns (cost, edges, vertexes) or None."""
    dist = {src: 0}
    pred: dict = {}
    heap = [(0, 0, src)]
    tie = itertools.count(1)
    done = set()
    while heap:
        d, _, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == dst:
            edges, verts = [], [u]
            while u != src:
                e, u = pred[u]
                edges.append(e)
                verts.append(u)
            edges.reverse()
            verts.reverse()
            return d, edges, verts
        for e, n in steps(u):
            if n in done or n in banned_vertices or e.id in banned_edges:
                continue
            counters.expansions += 1
            nd = d + weight(e)
            if n not in dist or nd < dist[n]:
                dist[n] = nd
                pred[n] = (e, u)
                heapq.heappush(heap, (nd, next(tie), n))
    return None


def _as_path(view: GraphView, verts, edges) -> PathValue:
    path = PathValue.seed(view, verts[0])
    for e, v in zip(edges, verts[1:]):
        path = path.extend(e, v)
    return path


def sp_scan(
    view: GraphView,
    weight_pos: int,
    c: TraversalConstraints,
    counters: Counters | None = None,
) -> Iterator[PathValue]:
    """Shortest paths by the numeric edge attribute at ``weight_pos``.

    With ``c.target`` set: k-shortest loopless paths from each seed to the
    target in nondecreasing cost, computed one at a time as they are pulled.
    Without a target: one cheapest path per reachable vertex, in settle order.
    """
    if c.empty:
        return
    counters = counters if counters is not None else Counters()
    weight = _weight_fn(view, weight_pos)
    steps = _sub_steps(view, c)
    for s in seed_ids(view, c):
        if c.target is None:
            source = _sssp(view, s, steps, weight, counters)
        else:
            source = _yen(view, s, c.target, steps, weight, counters)
        for path in source:
            if c.accepts(path):
                counters.paths_emitted += 1
                yield path


def _sssp(view, src, steps, weight, counters) -> Iterator[PathValue]:
    dist = {src: 0}
    pred: dict = {}
    node: dict = {src: PathValue.seed(view, src)}
    heap = [(0, 0, src)]
    tie = itertools.count(1)
    done = set()
    while heap:
        d, _, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u != src:
            e, p = pred[u]
            node[u] = node[p].extend(e, u)
            yield node[u]
        for e, n in steps(u):
            if n in done:
                continue
            counters.expansions += 1
            nd = d + weight(e)
            if n not in dist or nd < dist[n]:
                dist[n] = nd
                pred[n] = (e, u)
                heapq.heappush(heap, (nd, next(tie), n))


def _yen(view, src, dst, steps, weight, counters) -> Iterator[PathValue]:
    if src == dst or dst not in view.vertices:
        return
    first = _dijkstra(steps, weight, src, dst, frozenset(), frozenset(), counters)
    if first is None:
        return
    accepted: list[tuple[list, list]] = []
    seen = {tuple(e.id for e in first[1])}
    candidates: list = []
    tie = itertools.count()
    current = first
    while True:
        cost, edges, verts = current
        accepted.append((edges, verts))
        yield _as_path(view, verts, edges)
        root_cost = 0
        for i in range(len(edges)):
            spur = verts[i]
            root_ids = [e.id for e in edges[:i]]
            banned_edges = {
                p_edges[i].id
                for p_edges, _ in accepted
                if len(p_edges) > i and [e.id for e in p_edges[:i]] == root_ids
            }
            banned_vertices = set(verts[:i])
            found = _dijkstra(steps, weight, spur, dst, banned_edges, banned_vertices, counters)
            if found is not None:
                spur_cost, spur_edges, spur_verts = found
                total_edges = edges[:i] + spur_edges
                key = tuple(e.id for e in total_edges)
                if key not in seen:
                    seen.add(key)
                    heapq.heappush(
                        candidates,
                        (root_cost + spur_cost, next(tie), total_edges, verts[:i] + spur_verts),
                    )
            root_cost += weight(edges[i])
        if not candidates:
            return
        cost, _, edges, verts = heapq.heappop(candidates)
        current = (cost, edges, verts)
