import pytest

from graphrel import BindError, Database, PlanError, PlannerOptions
from graphrel.cli import sample_script
from graphrel.graphview import GraphStats
from graphrel.planner import LengthInterval, classify_predicates, infer_path_length, select_traversal
from graphrel.planner.rules import INF, bfs_threshold
from graphrel.sql.binder import bind
from graphrel.sql.parser import parse
from graphrel.sql.printer import to_sql

from oracles import g1, load
from test_reference_queries import ABC_TRIANGLES, LAWYER_CIRCLE, PROTEIN_LINK, TOP_ROUTES

SMITH_VERTEXES = "SELECT VS.birthdate, VS.fanOut FROM SocialNetwork.Vertexes VS WHERE VS.lstName = 'Smith'"


@pytest.fixture(scope="module")
def sample():
    db = Database()
    db.script(sample_script())
    return db


def bound(db, sql):
    return bind(parse(sql), db.catalog)


def interval(db, sql):
    return infer_path_length(bound(db, sql).conjuncts)


class TestLengthInference:
    def test_open_range_gives_minimum(self, sample):
        q = "SELECT PS FROM SocialNetwork.Paths PS WHERE PS.Edges[5..*].sDate = 'x'"
        assert interval(sample, q) == LengthInterval(6, INF)

    def test_closed_range_conjunction(self, sample):
        q = ("SELECT PS FROM SocialNetwork.Paths PS WHERE PS.Edges[5..*].sDate = 'x' "
             "AND PS.Edges[7..9].relative = TRUE")
        assert interval(sample, q).lo == 10

    def test_length_equality(self, sample):
        assert interval(sample, LAWYER_CIRCLE) == LengthInterval(2, 2)

    @pytest.mark.parametrize("cond, expected", [
        ("PS.Length < 4", LengthInterval(1, 3)),
        ("PS.Length <= 4", LengthInterval(1, 4)),
        ("PS.Length > 4", LengthInterval(5, INF)),
        ("4 >= PS.Length", LengthInterval(1, 4)),
        ("PS.Length >= 2 AND PS.Length <= 2.5", LengthInterval(2, 2)),
        ("PS.Edges[3].sDate = 'x'", LengthInterval(4, INF)),
        ("PS.Vertexes[3].lstName = 'x'", LengthInterval(3, INF)),
        ("PS.Edges[ANY].sDate = 'x'", LengthInterval(1, INF)),
        ("PS.Length = 2 OR PS.Length = 5", LengthInterval(1, INF)),
        ("NOT PS.Length = 2", LengthInterval(1, INF)),
    ])
    def test_bounds(self, sample, cond, expected):
        assert interval(sample, f"SELECT PS FROM SocialNetwork.Paths PS WHERE {cond}") == expected

    def test_no_predicates_default(self, sample):
        assert interval(sample, "SELECT PS FROM SocialNetwork.Paths PS") == LengthInterval(1, INF)

    def test_contradiction_is_empty(self, sample):
        assert interval(sample, "SELECT PS FROM SocialNetwork.Paths PS WHERE PS.Length = 2 AND PS.Length > 3").empty


class TestTraversalSelection:
    def test_hint_wins(self):
        assert str(select_traversal("Distance", GraphStats(1.0, 4, 4), LengthInterval(2, 2))) == "SP(Distance)"

    def test_bfs_below_threshold(self):
        assert select_traversal(None, GraphStats(1.5, 2, 3), LengthInterval(2, 2)).kind == "bfs"

    def test_dfs_above_threshold(self):
        assert bfs_threshold(3) == pytest.approx(3 ** 0.5)
        assert select_traversal(None, GraphStats(2.0, 2, 4), LengthInterval(1, 3)).kind == "dfs"

    def test_dfs_without_stats_or_bound(self):
        assert select_traversal(None, None, LengthInterval(2, 2)).kind == "dfs"
        assert select_traversal(None, GraphStats(0.5, 2, 1), LengthInterval(2, INF)).kind == "dfs"
        assert select_traversal(None, GraphStats(0.5, 2, 1), LengthInterval(1, 1)).kind == "dfs"

    def test_fan_out_below_one_selects_bfs(self):
        assert select_traversal(None, GraphStats(0.5, 2, 1), LengthInterval(1, 30)).kind == "bfs"


class TestClassification:
    def _classes(self, db, sql):
        b = bound(db, sql)
        return b, classify_predicates(b)

    def test_lawyer_circle(self, sample):
        b, cls = self._classes(sample, LAWYER_CIRCLE)
        assert [c.text for c in cls.relational] == ["U.Job = 'Lawyer'"]
        assert [p.conjunct.text for p in cls.probe_links] == ["PS.StartVertex.Id = U.uId"]
        assert sorted(c.text for c in cls.pushable[1]) == ["PS.Edges[0..*].StartDate > '1/1/2000'", "PS.Length = 2"]
        assert cls.residual == []

    def test_cross_position_is_pushable(self, sample):
        b, cls = self._classes(sample, ABC_TRIANGLES)
        assert len(cls.pushable[0]) == 5
        assert "P.Edges[2].EndVertex = P.Edges[0].StartVertex" in [c.text for c in cls.pushable[0]]

    def test_partition_is_complete(self, sample):
        for q in (LAWYER_CIRCLE, PROTEIN_LINK, ABC_TRIANGLES, TOP_ROUTES):
            b, cls = self._classes(sample, q)
            assert sorted(c.text for c in cls.all()) == sorted(c.text for c in b.conjuncts)

    def test_path_aggregate_pushable(self, sample):
        b, cls = self._classes(sample, "SELECT PS FROM RoadNetwork.Paths PS WHERE SUM(PS.Edges.Distance) < 100")
        assert len(cls.pushable[0]) == 1

    def test_subquery_is_residual(self, sample):
        q = ("SELECT PS FROM RoadNetwork.Paths PS WHERE PS.StartVertex.Id = 1 AND "
             "PS.EndVertex.Address IN (SELECT Address FROM Locations)")
        b, cls = self._classes(sample, q)
        assert len(cls.residual) == 1

    def test_two_paths_is_residual(self, sample):
        q = "SELECT P FROM RoadNetwork.Paths P, RoadNetwork.Paths Q WHERE P.Length = Q.Length"
        b, cls = self._classes(sample, q)
        assert [c.text for c in cls.residual] == ["P.Length = Q.Length"]

    def test_probes_disabled(self, sample):
        b = bound(sample, LAWYER_CIRCLE)
        cls = classify_predicates(b, use_probe=False)
        assert cls.probe_links == []
        assert "PS.StartVertex.Id = U.uId" in [c.text for c in cls.residual]


class TestBinding:
    def test_lawyer_circle_items(self, sample):
        b = bound(sample, LAWYER_CIRCLE)
        assert [(it.alias, it.kind) for it in b.items] == [("U", "table"), ("PS", "paths")]
        assert b.items[0].table.name == "Users"

    def test_unknown_path_attribute(self, sample):
        with pytest.raises(BindError, match="Nope"):
            bound(sample, "SELECT PS FROM SocialNetwork.Paths PS WHERE PS.Edges[0..*].Nope = 1")

    def test_fan_out_is_built_in(self, sample):
        b = bound(sample, "SELECT PS FROM SocialNetwork.Paths PS WHERE PS.Vertexes[0].FanOut > 1")
        assert len(b.conjuncts) == 1

    @pytest.mark.parametrize("sql", [
        "SELECT x FROM Nowhere",
        "SELECT U.nope FROM Users U",
        "SELECT uId FROM Users A, Users B",
        "SELECT PS FROM SocialNetwork PS",
        "SELECT PS FROM RoadNetwork.Paths PS HINT(SHORTESTPATH(Nope))",
        "SELECT U.uId FROM Users U WHERE U.uId = 'text'",
    ])
    def test_bind_errors(self, sample, sql):
        with pytest.raises(BindError):
            bound(sample, sql)

    def test_hint_on_text_attribute(self, sample):
        with pytest.raises(PlanError, match="not numeric"):
            sample.execute("SELECT PS FROM RoadNetwork.Paths PS HINT(SHORTESTPATH(Type)) "
                           "WHERE PS.StartVertex.Id = 1")


class TestExplain:
    def test_lawyer_circle(self, sample):
        text = sample.explain(LAWYER_CIRCLE)
        assert "PathScan(DFS" in text or "PathScan(BFS" in text
        assert "len=[2,2]" in text
        assert "seed=probe" in text

    def test_lawyer_circle_shape(self, sample):
        lines = sample.explain(LAWYER_CIRCLE).splitlines()
        assert lines[0].startswith("Project")
        assert lines[1].strip() == "NestedLoopJoin(probe)"
        assert "TableScan(Users AS U)" in lines[3]
        assert lines[4].strip().startswith("PathScan")

    def test_protein_link_limit(self, sample):
        assert sample.explain(PROTEIN_LINK).splitlines()[0] == "Limit(1)"

    def test_top_routes(self, sample):
        text = sample.explain(TOP_ROUTES)
        assert "PathScan(SP(Distance)" in text
        assert "Limit(2)" in text

    def test_vertex_scan_shape(self, sample):
        lines = [l.strip() for l in sample.explain(SMITH_VERTEXES).splitlines()]
        assert lines[0].startswith("Project")
        assert lines[1].startswith("Filter")
        assert lines[2].startswith("VertexScan")

    def test_unseeded_path_scan(self, sample):
        text = sample.explain("SELECT PS.Length FROM SocialNetwork.Paths PS")
        assert "seed=all" in text and "len=[1,*]" in text

    def test_unsatisfiable_interval_warns(self, sample):
        q = "SELECT PS.Length FROM SocialNetwork.Paths PS WHERE PS.Length > 3 AND PS.Length < 2"
        result = sample.execute(q)
        assert result.rows == []
        assert result.warnings and "unsatisfiable" in result.warnings[0]
        assert "EmptyResult" in sample.explain(q)

    def test_explain_statement(self, sample):
        result = sample.execute("EXPLAIN " + ABC_TRIANGLES)
        text = "\n".join(r[0] for r in result.rows)
        assert "Aggregate" in text and "len=[3,3]" in text

    def test_every_conjunct_once(self, sample):
        # the filters, probes and pushed predicates together account for each conjunct
        plan = sample.plan(LAWYER_CIRCLE)
        assert len(plan.classes.all()) == 4


class TestOptions:
    def test_naive_disables_everything(self):
        o = PlannerOptions.naive()
        assert (o.pushdown, o.infer_length, o.use_probe, o.prune, o.goal_directed) == (False,) * 5

    def test_forced_traversal(self):
        db = load(g1())
        q = "SELECT PS FROM G.PATHS PS WHERE PS.StartVertex.Id = 1"
        assert "PathScan(BFS" in db.explain(q, PlannerOptions(traversal="bfs"))
        assert "PathScan(DFS" in db.explain(q, PlannerOptions(traversal="dfs"))

    def test_naive_plan_filters_above(self):
        db = load(g1())
        text = db.explain("SELECT PS FROM G.PATHS PS WHERE PS.Length = 2", PlannerOptions.naive())
        assert "pushed=0" in text
        assert "Filter" in text

    def test_round_trip_of_conjunct_text(self, sample):
        for c in bound(sample, ABC_TRIANGLES).conjuncts:
            assert to_sql(parse(f"SELECT P FROM MLGraph.Paths P WHERE {c.text}").where) == c.text
