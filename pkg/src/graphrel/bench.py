"""Synthetic workloads comparing path scans against the relational baselines.

A bench spec is a query kind followed by ``key=value`` options::

    reach family=random(10000,100000,7) depth=20 queries=100
    reach-filtered selectivity=0.05,0.5 strategies=grfusion,join-baseline
    triangle family=random(80,600,3) selectivity=0.05,0.25,0.5
    sssp family=grid(20) queries=5 strategies=grfusion,grail-baseline

Every (kind, param) cell reports one row per strategy with the mean per-query
time over the warm repetitions and a checksum of the answers. Strategies must
agree on the checksum.
"""

from __future__ import annotations

import hashlib
import math
import random
import re
import shlex
import time
from dataclasses import dataclass, field

from .baseline import grail_sssp, join_reachability
from .engine import Database
from .errors import EngineError
from .planner import PlannerOptions

KINDS = ("reach", "reach-filtered", "triangle", "sssp", "topk")
STRATEGIES = ("grfusion", "join-baseline", "grail-baseline")
DEFAULT_STRATEGIES = {
    "reach": ("grfusion", "join-baseline"),
    "reach-filtered": ("grfusion", "join-baseline"),
    "triangle": ("grfusion", "join-baseline"),
    "sssp": ("grfusion", "grail-baseline"),
    "topk": ("grfusion", "grail-baseline"),
}
SUPPORTED = {
    "grfusion": set(KINDS),
    "join-baseline": {"reach", "reach-filtered", "triangle"},
    "grail-baseline": {"sssp", "topk"},
}

# reachability follows the usual methodology: breadth-first, nothing pushed
REACH_OPTIONS = PlannerOptions(pushdown=False, traversal="bfs")
FILTERED_OPTIONS = PlannerOptions(traversal="bfs")


class BenchError(EngineError):
    pass


@dataclass
class Family:
    name: str
    args: tuple[int, ...]

    def __str__(self):
        return f"{self.name}({','.join(map(str, self.args))})"


@dataclass
class BenchSpec:
    kind: str
    family: Family = field(default_factory=lambda: Family("random", (1000, 10000, 7)))
    depth: int = 20
    queries: int = 20
    params: list = field(default_factory=lambda: [None])
    strategies: tuple[str, ...] = ()
    reps: int = 5
    seed: int = 7
    k: int = 3


@dataclass
class BenchRow:
    strategy: str
    kind: str
    param: str
    mean_ms: float
    checksum: str

    def csv(self) -> str:
        return f"{self.strategy},{self.kind},{self.param},{self.mean_ms:.3f},{self.checksum}"


CSV_HEADER = "strategy,kind,param,mean_ms,checksum"


def parse_family(text: str) -> Family:
    m = re.fullmatch(r"\s*(chain|grid|random)\s*(?:\(([^)]*)\))?\s*", text)
    if m is None:
        raise BenchError(f"unknown graph family {text!r}")
    name = m.group(1)
    try:
        args = tuple(int(float(a)) for a in (m.group(2) or "").split(",") if a.strip())
    except ValueError:
        raise BenchError(f"bad arguments in {text!r}") from None
    needed = {"chain": 1, "grid": 1, "random": 3}[name]
    if len(args) != needed:
        raise BenchError(f"{name} takes {needed} argument(s), got {len(args)}")
    return Family(name, args)


def parse_spec(text: str) -> BenchSpec:
    tokens = shlex.split(text)
    if not tokens or tokens[0] not in KINDS:
        raise BenchError(f"bench spec must start with one of {', '.join(KINDS)}")
    spec = BenchSpec(tokens[0])
    for tok in tokens[1:]:
        key, sep, value = tok.partition("=")
        if not sep:
            raise BenchError(f"expected key=value, got {tok!r}")
        try:
            if key == "family":
                spec.family = parse_family(value)
            elif key in ("depth", "queries", "reps", "seed", "k"):
                setattr(spec, key, int(value))
            elif key == "selectivity":
                spec.params = [float(v) for v in value.split(",")]
            elif key == "strategies":
                spec.strategies = tuple(v.strip() for v in value.split(",") if v.strip())
            else:
                raise BenchError(f"unknown bench option {key!r}")
        except ValueError:
            raise BenchError(f"bad value for {key}: {value!r}") from None
    if not spec.strategies:
        spec.strategies = DEFAULT_STRATEGIES[spec.kind]
    for s in spec.strategies:
        if s not in STRATEGIES:
            raise BenchError(f"unknown strategy {s!r}")
        if spec.kind not in SUPPORTED[s]:
            raise BenchError(f"strategy {s} does not support {spec.kind}")
    if spec.kind in ("reach-filtered", "triangle") and spec.params == [None]:
        spec.params = [0.5]
    if spec.reps < 2:
        raise BenchError("reps must be at least 2 (the first run is discarded)")
    if spec.queries < 1 or spec.depth < 1:
        raise BenchError("queries and depth must be positive")
    return spec


# -- graph generation ----------------------------------------------------------------------


def generate_edges(family: Family) -> tuple[int, list[tuple[int, int]]]:
    """Vertex count and (src, dst) pairs; deterministic for a given family."""
    if family.name == "chain":
        (n,) = family.args
        return n, [(i, i + 1) for i in range(1, n)]
    if family.name == "grid":
        (side,) = family.args
        pairs = []
        for r in range(side):
            for c in range(side):
                v = r * side + c + 1
                if c + 1 < side:
                    pairs.append((v, v + 1))
                if r + 1 < side:
                    pairs.append((v, v + side))
        return side * side, pairs
    n, m, seed = family.args
    if n < 2 or m > n * (n - 1):
        raise BenchError(f"cannot place {m} distinct edges on {n} vertexes")
    rng = random.Random(seed)
    seen: set[tuple[int, int]] = set()
    pairs = []
    while len(pairs) < m:
        a = rng.randint(1, n)
        b = rng.randint(1, n)
        if a != b and (a, b) not in seen:
            seen.add((a, b))
            pairs.append((a, b))
    return n, pairs


def load_graph(db: Database, family: Family, seed: int, name: str = "G") -> None:
    """Tables ``{name}Nodes``/``{name}Links`` and a directed view ``name``.

    Each edge carries a weight in [1, 10) and a selectivity attribute drawn
    uniformly from [0, 1).
    """
    n, pairs = generate_edges(family)
    rng = random.Random(seed * 7919 + 1)
    db.create_table(f"{name}Nodes", "id:int")
    db.create_table(f"{name}Links", "eid:int,src:int,dst:int,weight:float,sel:float")
    db.insert_many(f"{name}Nodes", [(i,) for i in range(1, n + 1)])
    db.insert_many(
        f"{name}Links",
        [(i, a, b, round(1 + 9 * rng.random(), 3), rng.random()) for i, (a, b) in enumerate(pairs, 1)],
    )
    db.execute(
        f"CREATE DIRECTED GRAPH VIEW {name} VERTEXES(ID = id) FROM {name}Nodes "
        f"EDGES(ID = eid, FROM = src, TO = dst, weight = weight, sel = sel) FROM {name}Links"
    )


def query_pairs(n: int, count: int, seed: int) -> list[tuple[int, int]]:
    rng = random.Random(seed)
    return [(rng.randint(1, n), rng.randint(1, n)) for _ in range(count)]


def digest(values) -> str:
    return hashlib.sha256(repr(values).encode()).hexdigest()[:16]


# -- workloads -----------------------------------------------------------------------------


class Workload:
    def __init__(self, spec: BenchSpec, db: Database | None = None):
        self.spec = spec
        if db is None:
            db = Database()
            load_graph(db, spec.family, spec.seed)
        self.db = db
        self.links = db.table("GLinks")
        self.n = len(db.table("GNodes"))
        self.pairs = query_pairs(self.n, spec.queries, spec.seed + 1)
        self.sources = [s for s, _ in self.pairs]

    def run(self, strategy: str, param) -> list:
        """Answers for every query of the workload, in order."""
        kind = self.spec.kind
        return getattr(self, "_" + kind.replace("-", "_"))(strategy, param)

    def _reach(self, strategy, param):
        depth = self.spec.depth
        if strategy == "join-baseline":
            return [join_reachability(self.links, s, d, depth) for s, d in self.pairs]
        out = []
        for s, d in self.pairs:
            if s == d:
                out.append(True)
                continue
            sql = (
                f"SELECT TOP 1 PS.Length FROM G.PATHS PS WHERE PS.StartVertex.Id = {s} "
                f"AND PS.EndVertex.Id = {d} AND PS.Length <= {depth}"
            )
            out.append(bool(self.db.query(sql, REACH_OPTIONS)))
        return out

    def _reach_filtered(self, strategy, sel):
        depth = self.spec.depth
        if strategy == "join-baseline":
            pos = self.links.schema.position("sel")
            keep = lambda row: row[pos] < sel  # noqa: E731
            return [join_reachability(self.links, s, d, depth, edge_filter=keep) for s, d in self.pairs]
        out = []
        for s, d in self.pairs:
            if s == d:
                out.append(True)
                continue
            sql = (
                f"SELECT TOP 1 PS.Length FROM G.PATHS PS WHERE PS.StartVertex.Id = {s} "
                f"AND PS.EndVertex.Id = {d} AND PS.Length <= {depth} AND PS.Edges[0..*].sel < {sel!r}"
            )
            out.append(bool(self.db.query(sql, FILTERED_OPTIONS)))
        return out

    def _triangle(self, strategy, sel):
        if strategy == "join-baseline":
            sql = (
                "SELECT COUNT(*) FROM GLinks A, GLinks B, GLinks C "
                "WHERE A.dst = B.src AND B.dst = C.src AND C.dst = A.src "
                f"AND A.sel < {sel!r} AND B.sel < {sel!r} AND C.sel < {sel!r}"
            )
        else:
            sql = (
                "SELECT COUNT(*) FROM G.PATHS PS WHERE PS.Length = 3 "
                f"AND PS.StartVertex.Id = PS.EndVertex.Id AND PS.Edges[0..*].sel < {sel!r}"
            )
        return [self.db.query(sql)[0][0]]

    def _sssp(self, strategy, param):
        out = []
        for s in self.sources:
            if strategy == "grail-baseline":
                dist = grail_sssp(self.links, "weight", s)
                dist.pop(s, None)
            else:
                sql = (
                    "SELECT PS.EndVertex.Id, SUM(PS.Edges.weight) FROM G.PATHS PS "
                    f"HINT(SHORTESTPATH(weight)) WHERE PS.StartVertex.Id = {s}"
                )
                dist = dict(self.db.query(sql))
            out.append(sorted((v, round(d, 6)) for v, d in dist.items()))
        return out

    def _topk(self, strategy, param):
        # the baseline only knows distances, so the shared answer is the best cost
        out = []
        for s, d in self.pairs:
            if strategy == "grail-baseline":
                best = grail_sssp(self.links, "weight", s).get(d)
            else:
                sql = (
                    f"SELECT TOP {self.spec.k} SUM(PS.Edges.weight) FROM G.PATHS PS "
                    f"HINT(SHORTESTPATH(weight)) WHERE PS.StartVertex.Id = {s} AND PS.EndVertex.Id = {d}"
                )
                costs = [r[0] for r in self.db.query(sql)] if s != d else [0]
                best = costs[0] if costs else None
            out.append(None if best is None else round(best, 6))
        return out


def run_bench(spec: BenchSpec, db: Database | None = None, clock=time.perf_counter) -> tuple[list[BenchRow], bool]:
    """Run every (param, strategy) cell; returns the rows and whether checksums agree."""
    work = Workload(spec, db)
    rows: list[BenchRow] = []
    agree = True
    for param in spec.params:
        label = "-" if param is None else f"{param:g}"
        if spec.kind in ("reach", "reach-filtered"):
            label = f"depth={spec.depth}" + ("" if param is None else f";sel={param:g}")
        sums = set()
        for strategy in spec.strategies:
            times = []
            answers = None
            for _ in range(spec.reps):
                start = clock()
                answers = work.run(strategy, param)
                times.append(clock() - start)
            warm = times[1:]
            per_query = sum(warm) / len(warm) / max(1, len(answers)) * 1000.0
            checksum = digest(answers)
            sums.add(checksum)
            rows.append(BenchRow(strategy, spec.kind, label, per_query, checksum))
        if len(sums) > 1:
            agree = False
    return rows, agree


def brute_force_triangles(n: int, edges: list[tuple[int, int]]) -> int:
    """Closed directed 3-paths over distinct vertexes, by checking every triple."""
    mult: dict[tuple[int, int], int] = {}
    for a, b in edges:
        mult[(a, b)] = mult.get((a, b), 0) + 1
    total = 0
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            if b == a or (a, b) not in mult:
                continue
            for c in range(1, n + 1):
                if c == a or c == b:
                    continue
                total += mult[(a, b)] * mult.get((b, c), 0) * mult.get((c, a), 0)
    return total


def growth(rows: list[BenchRow], strategy: str) -> float:
    times = [r.mean_ms for r in rows if r.strategy == strategy]
    return times[-1] / times[0] if times and times[0] > 0 else math.inf
