"""Rule-based analysis of WHERE conjuncts: classification, path length
inference and traversal selection."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..graphview import GraphStats
from ..sql import ast
from ..sql.binder import (
    BCmp, BIn, BInSub, BLit, BoundSelect, Conjunct, PathAgg, PathElem, PathProp, item_refs, walk,
)

INF = math.inf


@dataclass(frozen=True)
class LengthInterval:
    lo: int = 1
    hi: float = INF

    @property
    def empty(self) -> bool:
        return self.lo > self.hi

    def intersect(self, lo: int = 0, hi: float = INF) -> "LengthInterval":
        return LengthInterval(max(self.lo, lo), min(self.hi, hi))

    def __str__(self):
        hi = "*" if self.hi == INF else int(self.hi)
        return f"[{self.lo},{hi}]"


@dataclass(frozen=True)
class TraversalKind:
    kind: str  # dfs | bfs | sp
    weight: str | None = None

    def __str__(self):
        return f"SP({self.weight})" if self.kind == "sp" else self.kind.upper()


# -- length inference ---------------------------------------------------------------------


def _length_bound(op: str, value) -> tuple[int, float]:
    if op == "=":
        return (int(value), int(value)) if float(value).is_integer() else (1, 0)
    if op == "<":
        return 0, math.ceil(value) - 1
    if op == "<=":
        return 0, math.floor(value)
    if op == ">":
        return math.floor(value) + 1, INF
    if op == ">=":
        return math.ceil(value), INF
    return 0, INF


_FLIP = {"=": "=", "<>": "<>", "<": ">", "<=": ">=", ">": "<", ">=": "<="}


def _is_length(node, item) -> bool:
    return isinstance(node, PathProp) and node.prop == "length" and (item is None or node.item == item)


def _int_literal(node) -> bool:
    return isinstance(node, BLit) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool)


def _min_length(elem: PathElem) -> int:
    """Shortest path on which ``elem`` evaluates to a non-null value."""
    index = elem.index
    edges = elem.coll == "edges"
    if elem.coll in ("start", "end"):
        return 0
    if isinstance(index, ast.Single):
        return index.position + 1 if edges else index.position
    if isinstance(index, ast.Range):
        pos = index.lo if index.hi is None else index.hi
        return pos + 1 if edges else pos
    if isinstance(index, ast.AnyIndex):
        return 0
    return 1 if edges else 0


def _operand_elems(node):
    if isinstance(node, PathElem):
        yield node
    elif isinstance(node, PathAgg):
        yield node.elem


def conjunct_bounds(node, item: int | None = None) -> tuple[int, float]:
    """Length bounds implied by one top-level conjunct."""
    lo, hi = 0, INF
    if isinstance(node, BCmp):
        left, right, op = node.left, node.right, node.op
        if _is_length(right, item) and _int_literal(left):
            left, right, op = right, left, _FLIP[op]
        if _is_length(left, item) and _int_literal(right):
            lo, hi = _length_bound(op, right.value)
        operands = (node.left, node.right)
    elif isinstance(node, BIn):
        if _is_length(node.operand, item) and not node.negated and all(_int_literal(i) for i in node.items):
            values = [i.value for i in node.items if float(i.value).is_integer()]
            if not values:
                return 1, 0
            lo, hi = int(min(values)), int(max(values))
        operands = (node.operand,) + node.items
    elif isinstance(node, BInSub):
        operands = (node.operand,)
    else:
        return lo, hi
    for operand in operands:
        for elem in _operand_elems(operand):
            if item is None or elem.item == item:
                lo = max(lo, _min_length(elem))
    return lo, hi


def infer_path_length(conjuncts, item: int | None = None) -> LengthInterval:
    """Intersect the bounds of every positive top-level conjunct with [1, inf)."""
    interval = LengthInterval()
    for c in conjuncts:
        node = c.bound if isinstance(c, Conjunct) else c
        lo, hi = conjunct_bounds(node, item)
        interval = interval.intersect(lo, hi)
    return interval


# -- traversal selection ------------------------------------------------------------------


def bfs_threshold(length: int) -> float:
    return length ** (1.0 / (length - 1))


def select_traversal(hint, stats, interval: LengthInterval | None) -> TraversalKind:
    """SHORTESTPATH hint wins; otherwise BFS iff F < L^(1/(L-1)), DFS by default."""
    if hint is not None:
        name = hint if isinstance(hint, str) else hint.attribute
        return TraversalKind("sp", name)
    if stats is None or interval is None or interval.hi == INF or interval.hi < 2:
        return TraversalKind("dfs")
    fan_out = stats.avg_fan_out if isinstance(stats, GraphStats) else float(stats)
    length = int(interval.hi)
    if fan_out < bfs_threshold(length):
        return TraversalKind("bfs")
    return TraversalKind("dfs")


# -- classification -----------------------------------------------------------------------


@dataclass
class ProbeLink:
    conjunct: Conjunct
    path: int  # path item index
    end: str  # start | end
    expr: object  # bound expression over other items; None for literal lists
    values: tuple | None = None  # literal values (IN list or constant)

    @property
    def literal(self) -> bool:
        return self.values is not None


@dataclass
class PredicateClass:
    relational: list[Conjunct] = field(default_factory=list)
    pushable: dict[int, list[Conjunct]] = field(default_factory=dict)
    probe_links: list[ProbeLink] = field(default_factory=list)
    residual: list[Conjunct] = field(default_factory=list)

    def all(self) -> list[Conjunct]:
        out = list(self.relational)
        for cs in self.pushable.values():
            out.extend(cs)
        out.extend(p.conjunct for p in self.probe_links)
        out.extend(self.residual)
        return out


def _vertex_id_ref(node, paths) -> PathElem | None:
    if (
        isinstance(node, PathElem)
        and node.coll in ("start", "end")
        and node.field == "id"
        and node.item in paths
    ):
        return node
    return None


def _has_subquery(node) -> bool:
    return any(isinstance(n, BInSub) for n in walk(node))


def _probe_link(c: Conjunct, scope_id: int, paths: set[int]) -> ProbeLink | None:
    node = c.bound
    if isinstance(node, BCmp) and node.op == "=":
        for a, b in ((node.left, node.right), (node.right, node.left)):
            elem = _vertex_id_ref(a, paths)
            if elem is None or _has_subquery(b) or any(True for _ in _multi(b)):
                continue
            refs = item_refs(b)
            if any(r[0] != scope_id or r[1] in paths for r in refs):
                continue
            if isinstance(b, BLit):
                if not _int_literal(b):
                    continue
                return ProbeLink(c, elem.item, elem.coll, None, (b.value,))
            if isinstance(b, PathAgg):
                continue
            return ProbeLink(c, elem.item, elem.coll, b)
    if isinstance(node, BIn) and not node.negated:
        elem = _vertex_id_ref(node.operand, paths)
        if elem is not None and node.items and all(_int_literal(i) for i in node.items):
            values = tuple(dict.fromkeys(i.value for i in node.items))
            # a scan has one target, so only start vertexes take a list
            if elem.coll == "start" or len(values) == 1:
                return ProbeLink(c, elem.item, elem.coll, None, values)
    return None


def _multi(node):
    for n in walk(node):
        if isinstance(n, PathElem) and n.multi:
            yield n


def classify_predicates(bound: BoundSelect, use_probe: bool = True) -> PredicateClass:
    """Partition the WHERE conjuncts into the four planner classes."""
    scope_id = bound.scope.id
    paths = {it.index for it in bound.items if it.is_path}
    out = PredicateClass()
    for c in bound.conjuncts:
        if use_probe:
            link = _probe_link(c, scope_id, paths)
            if link is not None:
                out.probe_links.append(link)
                continue
        refs = {i for s, i in item_refs(c.bound) if s == scope_id}
        used_paths = refs & paths
        if _has_subquery(c.bound):
            out.residual.append(c)
        elif len(used_paths) == 1 and refs == used_paths:
            out.pushable.setdefault(next(iter(used_paths)), []).append(c)
        elif not used_paths:
            out.relational.append(c)
        else:
            out.residual.append(c)
    return out
