import itertools

import pytest

from graphrel import Database, PlannerOptions, QueryError
from graphrel.executor.traversal import Counters, TraversalConstraints, bfs_scan, dfs_scan, sp_scan

from oracles import Graph, closed_triangles, dijkstra, g1, load, simple_paths


@pytest.fixture
def db():
    return load(g1())


@pytest.fixture
def view(db):
    return db.graph_view("G")


def edge_lists(paths):
    return [list(p.edges) for p in paths]


def rendered(*edge_lists):
    """Path strings of G1 paths starting at vertex 1."""
    ends = {eid: dst for eid, _, dst in g1().edges}
    return ["1 " + " ".join(f"-e{e}-> {ends[e]}" for e in eids) for eids in edge_lists]


class TestScans:
    def test_vertex_scan_fan_out(self, db):
        assert db.query("SELECT VS.Id FROM G.VERTEXES VS WHERE VS.FanOut > 1") == [(1,)]

    def test_vertex_rows_expose_fan_in(self, db):
        rows = db.query("SELECT VS.Id, VS.FanIn, VS.FanOut FROM G.VERTEXES VS")
        assert rows == [(1, 1, 2), (2, 1, 1), (3, 2, 1), (4, 0, 0)]

    def test_edge_scan(self, db):
        rows = db.query("SELECT ES.Id, ES.From, ES.To, ES.label FROM G.EDGES ES WHERE ES.w < 5")
        assert rows == [(1, 1, 2, "A"), (2, 2, 3, "B"), (4, 3, 1, "C")]

    def test_edge_scan_empty_view(self):
        assert load(Graph([], [])).query("SELECT ES.Id FROM G.EDGES ES") == []

    def test_attributes_read_at_pull_time(self, db):
        rows = db.stream("SELECT VS.kind FROM G.VERTEXES VS")
        db.catalog.update_where("V", {"kind": "changed"}, {"vid": 1})
        assert next(rows) == ("changed",)
        rows.close()


class TestDepthFirst:
    def test_closed_triangle(self, view):
        assert edge_lists(dfs_scan(view, TraversalConstraints(3, 3, seeds=[1]))) == [[1, 2, 4]]

    def test_short_paths(self, view):
        got = edge_lists(dfs_scan(view, TraversalConstraints(1, 2, seeds=[1])))
        assert sorted(got) == sorted([[1], [3], [1, 2], [3, 4]])

    def test_emission_order(self, view):
        # adjacency order, shallow before deep along each branch
        got = edge_lists(dfs_scan(view, TraversalConstraints(1, 2, seeds=[1])))
        assert got == [[1], [1, 2], [3], [3, 4]]

    def test_interval_beyond_longest_path(self, view):
        assert list(dfs_scan(view, TraversalConstraints(5, 5, seeds=[1]))) == []

    def test_unknown_seed(self, view):
        assert list(dfs_scan(view, TraversalConstraints(seeds=[99]))) == []

    def test_unseeded_matches_oracle(self, view):
        got = sorted(p.key for p in dfs_scan(view, TraversalConstraints()))
        assert got == sorted(simple_paths(g1()))


class TestBreadthFirst:
    @pytest.mark.parametrize("lo, hi", [(3, 3), (1, 2), (5, 5)])
    def test_same_set_as_dfs(self, view, lo, hi):
        c = TraversalConstraints(lo, hi, seeds=[1])
        assert sorted(p.key for p in bfs_scan(view, c)) == sorted(p.key for p in dfs_scan(view, c))

    def test_lengths_nondecreasing(self, view):
        lengths = [p.length for p in bfs_scan(view, TraversalConstraints(1, 2, seeds=[1]))]
        assert lengths == [1, 1, 2, 2]

    def test_unseeded_uses_all_vertexes(self, view):
        starts = {p.start for p in bfs_scan(view, TraversalConstraints(1, 1))}
        assert starts == {1, 2, 3}


class TestShortestPath:
    def weight_pos(self, view):
        return view.edge_attribute("w")

    def test_k_shortest_to_target(self, view):
        paths = sp_scan(view, self.weight_pos(view), TraversalConstraints(seeds=[1], target=3))
        first, second = next(paths), next(paths)
        assert list(first.edges) == [1, 2]
        assert list(second.edges) == [3]
        assert list(paths) == []

    def test_k_shortest_is_lazy(self, view):
        counters = Counters()
        paths = sp_scan(view, self.weight_pos(view), TraversalConstraints(seeds=[1], target=3), counters)
        next(paths)
        after_first = counters.expansions
        next(paths)
        assert counters.expansions > after_first

    def test_sssp(self, view):
        paths = list(sp_scan(view, self.weight_pos(view), TraversalConstraints(seeds=[1])))
        costs = {p.end: sum(view.edge_values(e)[3] for e in p.edge_records) for p in paths}
        assert costs == {2: 1.0, 3: 2.0}
        assert costs == {v: d for v, d in dijkstra(g1(), 1).items() if v != 1}

    def test_sssp_emits_in_distance_order(self, view):
        ends = [p.end for p in sp_scan(view, self.weight_pos(view), TraversalConstraints(seeds=[1]))]
        assert ends == [2, 3]

    def test_negative_weight(self, db, view):
        db.catalog.update_where("E", {"w": -1.0}, {"eid": 2})
        with pytest.raises(QueryError, match="2"):
            list(sp_scan(view, self.weight_pos(view), TraversalConstraints(seeds=[1], target=3)))

    def test_sql_top_two(self, db):
        rows = db.query("SELECT TOP 2 PS.PathString, SUM(PS.Edges.w) FROM G.PATHS PS HINT(SHORTESTPATH(w)) "
                        "WHERE PS.StartVertex.Id = 1 AND PS.EndVertex.Id = 3")
        assert rows == [("1 -e1-> 2 -e2-> 3", 2.0), ("1 -e3-> 3", 5.0)]

    def test_pushed_edge_filter_restricts_subgraph(self, db):
        rows = db.query("SELECT PS.PathString FROM G.PATHS PS HINT(SHORTESTPATH(w)) "
                        "WHERE PS.StartVertex.Id = 1 AND PS.EndVertex.Id = 3 AND PS.Edges.label = 'A'")
        assert rows == [("1 -e3-> 3",)]


class TestRelational:
    def test_triangle_count(self, db):
        rows = db.query("SELECT COUNT(P) FROM G.PATHS P WHERE P.Length = 3 "
                        "AND P.Edges[2].EndVertex = P.Edges[0].StartVertex")
        assert rows == [(3,)]
        assert closed_triangles(g1()) == 3

    def test_aggregates(self, db):
        rows = db.query("SELECT COUNT(*), SUM(E.w), MIN(E.w), MAX(E.w), AVG(E.w) FROM E")
        assert rows == [(4, 8.0, 1.0, 5.0, 2.0)]

    def test_aggregate_on_empty_input(self, db):
        assert db.query("SELECT COUNT(*), SUM(E.w) FROM E WHERE E.w > 100") == [(0, None)]

    def test_limit_stops_pulling(self, db):
        db.query("SELECT PS FROM G.PATHS PS LIMIT 1")
        assert db.last_counters.paths_emitted == 1

    def test_limit_zero(self, db):
        assert db.query("SELECT PS FROM G.PATHS PS LIMIT 0") == []

    def test_select_path_renders_string(self, db):
        rows = db.execute("SELECT PS FROM G.PATHS PS WHERE PS.StartVertex.Id = 1 AND PS.Length = 3").rows
        assert rows == [("1 -e1-> 2 -e2-> 3 -e4-> 1",)]

    def test_join_bag_semantics(self, db):
        rows = db.query("SELECT A.eid, B.eid FROM E A, E B WHERE A.dst = B.src")
        expected = [(a, b) for (a, _, ad), (b, bs, _) in itertools.product(g1().edges, repeat=2) if ad == bs]
        assert sorted(rows) == sorted(expected)

    def test_probe_join_with_absent_seed(self, db):
        db.insert("V", (50, "z"))  # in the table and the view
        db.execute("CREATE TABLE S (x INTEGER)")
        db.insert_many("S", [(1,), (99,)])
        rows = db.query("SELECT S.x, PS.Length FROM S, G.PATHS PS WHERE PS.StartVertex.Id = S.x AND PS.Length = 1")
        assert sorted(rows) == [(1, 1), (1, 1)]

    def test_null_comparison_false(self, db):
        db.insert("V", (5, None))
        assert db.query("SELECT V.vid FROM V WHERE V.kind = 'x' OR V.kind <> 'x'") == [
            (v,) for v in (1, 2, 3, 4)
        ]


class TestTempGraph:
    def setup_db(self):
        db = load(g1())
        db.execute("CREATE TABLE O (oid INTEGER, avoid TEXT)")
        db.insert_many("O", [(1, "A"), (2, "B"), (3, "C")])
        return db

    def test_uncorrelated_built_once(self):
        db = self.setup_db()
        rows = db.query(
            "SELECT O.oid, PS.Length FROM O, TEMPGRAPH(VERTEXES(ID = vid) FROM V "
            "EDGES(ID = eid, FROM = src, TO = dst) FROM E WHERE label <> 'C').PATHS PS "
            "WHERE PS.StartVertex.Id = 1 AND PS.Length = 2"
        )
        assert sorted(rows) == [(1, 2), (2, 2), (3, 2)]
        assert db.last_counters.tempgraph_builds == 1

    def test_correlated_rebuilds_per_binding(self):
        db = self.setup_db()
        rows = db.query(
            "SELECT O.oid, PS.PathString FROM O, TEMPGRAPH(VERTEXES(ID = vid) FROM V "
            "EDGES(ID = eid, FROM = src, TO = dst, w = w) FROM E WHERE E.label <> O.avoid).PATHS PS "
            "HINT(SHORTESTPATH(w)) WHERE PS.StartVertex.Id = 1 AND PS.EndVertex.Id = 3"
        )
        # oid 1 avoids A and loses both routes; oid 3 avoids C, which only e4 carries
        assert rows == [(2, "1 -e3-> 3"), (3, "1 -e1-> 2 -e2-> 3"), (3, "1 -e3-> 3")]
        assert db.last_counters.tempgraph_builds == 3

    def test_zero_edges(self):
        db = self.setup_db()
        rows = db.query(
            "SELECT PS.Length FROM TEMPGRAPH(VERTEXES(ID = vid) FROM V "
            "EDGES(ID = eid, FROM = src, TO = dst) FROM E WHERE eid > 100).PATHS PS"
        )
        assert rows == []

    def test_duplicate_ids(self):
        db = Database()
        db.create_table("V", "vid:int")
        db.create_table("E", "eid:int,src:int,dst:int")
        db.insert_many("V", [(1,), (1,)])
        with pytest.raises(QueryError, match="duplicate"):
            db.query("SELECT PS.Length FROM TEMPGRAPH(VERTEXES(ID = vid) FROM V "
                     "EDGES(ID = eid, FROM = src, TO = dst) FROM E).PATHS PS")

    def test_not_registered(self):
        db = self.setup_db()
        db.query("SELECT PS.Length FROM TEMPGRAPH(VERTEXES(ID = vid) FROM V "
                 "EDGES(ID = eid, FROM = src, TO = dst) FROM E).PATHS PS")
        assert len(db.catalog.hooks_for(db.table("E"))) == 1


class TestPathExpressions:
    def one(self, db, cond, seed=1, length=None):
        extra = f" AND PS.Length = {length}" if length else ""
        rows = db.query(f"SELECT PS FROM G.PATHS PS WHERE PS.StartVertex.Id = {seed}{extra} AND {cond}")
        return [r[0] for r in rows]

    def test_cross_position_vertex_ids(self, db):
        assert self.one(db, "PS.Edges[2].EndVertex = PS.Edges[0].StartVertex") == rendered([1, 2, 4])

    def test_sum_fold(self, db):
        rows = db.query("SELECT SUM(PS.Edges.w) FROM G.PATHS PS WHERE PS.StartVertex.Id = 1 AND PS.Length = 2 "
                        "AND PS.EndVertex.Id = 3")
        assert rows == [(2.0,)]

    def test_out_of_bounds_index_is_false(self, db):
        assert self.one(db, "PS.Edges[5].w = 1", length=2) == []
        assert self.one(db, "NOT PS.Edges[5].w = 1", length=2) == rendered([1, 2], [3, 4])

    def test_universal_range_clipped(self, db):
        assert self.one(db, "PS.Edges[1..*].w = 1") == rendered([1, 2], [1, 2, 4], [3, 4])

    def test_any(self, db):
        assert self.one(db, "PS.Edges[ANY].label = 'C'") == rendered([1, 2, 4], [3, 4])

    def test_any_counts_closure_vertex(self, db):
        assert self.one(db, "PS.Vertexes[ANY].Id = 1", length=3) == rendered([1, 2, 4])

    def test_vertex_positions(self, db):
        assert self.one(db, "PS.Vertexes[1].kind = 'x' AND PS.Vertexes[1].Id = 2", length=1) == rendered([1])

    def test_aggregate_count(self, db):
        rows = db.query("SELECT COUNT(PS.Edges), MAX(PS.Edges.w) FROM G.PATHS PS "
                        "WHERE PS.StartVertex.Id = 1 AND PS.Length = 3")
        assert rows == [(3, 1.0)]


class TestLaziness:
    def ladder(self, layers=14):
        # two parallel edges between consecutive layer vertexes: 2**layers full-length paths
        edges = []
        for i in range(layers):
            edges += [(2 * i + 1, i, i + 1), (2 * i + 2, i, i + 1)]
        return Graph(list(range(layers + 1)), edges, True)

    def test_limit_one_expansions_bounded(self):
        db = load(self.ladder())
        q = "SELECT PS FROM G.PATHS PS WHERE PS.StartVertex.Id = 0 AND PS.EndVertex.Id = 14"
        db.query(q + " LIMIT 1")
        first = db.last_counters.expansions
        assert first <= 14 + 2
        assert len(db.query(q)) == 2 ** 14
        assert db.last_counters.expansions > 100 * first

    def test_stream_is_lazy(self):
        db = load(self.ladder())
        rows = db.stream("SELECT PS FROM G.PATHS PS WHERE PS.StartVertex.Id = 0")
        next(rows)
        rows.close()
        assert db.last_counters.paths_emitted <= 1


class TestOptionsAgree:
    @pytest.mark.parametrize("q", [
        "SELECT PS.PathString FROM G.PATHS PS WHERE PS.Length <= 3 AND PS.Edges[0..*].w < 5",
        "SELECT PS.PathString FROM G.PATHS PS WHERE SUM(PS.Edges.w) < 3",
        "SELECT PS.PathString FROM G.PATHS PS WHERE PS.EndVertex.Id = 1",
    ])
    def test_naive_and_optimized(self, db, q):
        assert sorted(db.query(q)) == sorted(db.query(q, PlannerOptions.naive()))
