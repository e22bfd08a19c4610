import pytest
from hypothesis import given, settings, strategies as st

from graphrel.errors import ParseError
from graphrel.sql import ast
from graphrel.sql.parser import parse, parse_expression, parse_script, split_script
from graphrel.sql.printer import to_sql

SOCIAL_VIEW = """CREATE UNDIRECTED GRAPH VIEW SocialNetwork
VERTEXES(ID = uId, lstName = lName, birthdate = dob) FROM Users
EDGES (ID = relId, FROM = uId1, TO = uId2, sDate = startDate, relative = isRelative) FROM Relationships"""

TOP_ROUTES = """SELECT TOP 2 PS
FROM RoadNetwork.Paths PS HINT(SHORTESTPATH(Distance)), RoadNetwork.Vertexes Src, RoadNetwork.Vertexes Dest
WHERE PS.StartVertex.Id = Src.Id AND PS.EndVertex.Id = Dest.Id AND Src.Address = "Address 1" AND Dest.Address = "Address 2\""""


class TestStatements:
    def test_create_graph_view(self):
        stmt = parse(SOCIAL_VIEW)
        d = stmt.definition
        assert d.name == "SocialNetwork"
        assert d.directed is False
        assert d.vertexes == ast.SourceSpec("Users", "uId", (("lstName", "lName"), ("birthdate", "dob")))
        assert d.edges == ast.SourceSpec(
            "Relationships", "relId", (("sDate", "startDate"), ("relative", "isRelative")), "uId1", "uId2"
        )

    def test_direction_keyword_is_required(self):
        with pytest.raises(ParseError):
            parse(SOCIAL_VIEW.replace("UNDIRECTED ", ""))

    def test_edges_need_from_and_to(self):
        with pytest.raises(ParseError):
            parse("CREATE DIRECTED GRAPH VIEW G VERTEXES(ID = a) FROM V EDGES(ID = b, FROM = c) FROM E")

    def test_duplicate_alias_rejected(self):
        with pytest.raises(ParseError):
            parse("CREATE DIRECTED GRAPH VIEW G VERTEXES(ID = a, x = b, x = c) FROM V "
                  "EDGES(ID = b, FROM = c, TO = d) FROM E")

    def test_source_filter(self):
        stmt = parse("CREATE DIRECTED GRAPH VIEW G VERTEXES(ID = a) FROM V WHERE a > 3 "
                     "EDGES(ID = b, FROM = c, TO = d) FROM E WHERE d <> 2")
        assert stmt.definition.vertexes.where == ast.Compare(">", ast.Ref((ast.RefPart("a"),)), ast.Literal(3))
        assert stmt.definition.edges.where is not None

    def test_top_and_hint(self):
        stmt = parse(TOP_ROUTES)
        assert stmt.top == 2
        first = stmt.from_items[0]
        assert isinstance(first, ast.GraphRef)
        assert first.kind == "PATHS"
        assert first.hint == ast.ShortestPathHint("Distance")
        assert stmt.items[0].expr == ast.Ref((ast.RefPart("PS"),))

    def test_select_from_error_names_token(self):
        with pytest.raises(ParseError) as info:
            parse("SELECT FROM")
        err = info.value
        assert (err.line, err.column) == (1, 8)
        assert err.token == "FROM"

    def test_error_position_on_later_line(self):
        with pytest.raises(ParseError) as info:
            parse("SELECT a\nFROM T\nWHERE a = = 1")
        assert info.value.line == 3

    def test_keywords_case_insensitive_identifiers_preserved(self):
        stmt = parse("select U.uId from Users u where u.Job = 'x' limit 3")
        assert stmt.limit == 3
        assert stmt.from_items[0] == ast.TableRef("Users", "u")
        assert stmt.items[0].expr.names == ("U", "uId")

    def test_path_reference_forms(self):
        e = parse_expression("PS.Edges[0..*].StartDate > '1/1/2000'")
        assert e.left.parts[1] == ast.RefPart("Edges", ast.Range(0, None))
        e = parse_expression("PS.Edges[2..5].w = 1")
        assert e.left.parts[1].index == ast.Range(2, 5)
        e = parse_expression("PS.Vertexes[ANY].kind = 'x'")
        assert e.left.parts[1].index == ast.AnyIndex()
        e = parse_expression("P.Edges[2].EndVertex = P.Edges[0].StartVertex")
        assert e.left.parts == (ast.RefPart("P"), ast.RefPart("Edges", ast.Single(2)), ast.RefPart("EndVertex"))

    def test_bad_range_rejected(self):
        with pytest.raises(ParseError):
            parse_expression("PS.Edges[5..2].w = 1")

    def test_path_aggregate(self):
        e = parse_expression("SUM(PS.Edges.Weight) < 100")
        assert e.left == ast.Call("SUM", (ast.Ref((ast.RefPart("PS"), ast.RefPart("Edges"), ast.RefPart("Weight"))),))

    def test_tempgraph(self):
        stmt = parse(
            "SELECT PS.PathString FROM Patient, TEMPGRAPH(VERTEXES (ID = LocId) FROM Locations "
            "EDGES(ID = rId, FROM = rStart, TO = rEnd, Distance = rDist) FROM Roads "
            "WHERE Roads.Type NOT IN (SELECT Type FROM UAvoidance WHERE UAvoidance.UserId = Patient.Id)"
            ").Paths PS HINT(SHORTESTPATH(Distance)) WHERE PS.StartVertex.Id = Patient.LocationId"
        )
        temp = stmt.from_items[1]
        assert isinstance(temp, ast.TempGraphRef)
        assert isinstance(temp.edges.where, ast.InSelect)
        assert temp.edges.where.negated
        assert temp.hint == ast.ShortestPathHint("Distance")

    def test_meta_command(self):
        assert parse(".timing on") == ast.MetaCommand("timing", ("on",))

    def test_explain(self):
        stmt = parse("EXPLAIN SELECT a FROM T")
        assert isinstance(stmt, ast.Explain)

    def test_insert_with_columns(self):
        stmt = parse("INSERT INTO T (a, b) VALUES (1, 'x'), (-2, NULL)")
        assert stmt.columns == ("a", "b")
        assert stmt.rows[1] == (ast.Literal(-2), ast.Literal(None))

    def test_empty_input(self):
        with pytest.raises(ParseError):
            parse("   ")


class TestScripts:
    def test_split_tracks_lines(self):
        text = "CREATE TABLE T (a INTEGER);\n\nINSERT INTO T VALUES (1);\n.tables\nSELECT a\nFROM T;"
        chunks = split_script(text)
        assert [line for line, _ in chunks] == [1, 3, 4, 5]
        assert chunks[2][1] == ".tables"

    def test_semicolon_inside_string(self):
        chunks = split_script("INSERT INTO T VALUES ('a;b');\nSELECT a FROM T;")
        assert len(chunks) == 2
        assert parse(chunks[0][1]).rows[0][0] == ast.Literal("a;b")

    def test_empty_script(self):
        assert split_script("") == []
        assert split_script("-- only a comment\n") == []

    def test_parse_script_error_line(self):
        with pytest.raises(ParseError) as info:
            parse_script("CREATE TABLE T (a INTEGER);\nINSERT INTO T VALUES (1);\nSELEC a FROM T;")
        assert info.value.line == 3


# -- round trip ---------------------------------------------------------------------------

NAMES = st.sampled_from(["a", "b", "uId", "Job", "lName", "x_1", "Weight", "T", "U"])
ALIASES = st.sampled_from(["PS", "P", "U", "X"])
INDEXES = st.one_of(
    st.none(),
    st.integers(0, 9).map(ast.Single),
    st.tuples(st.integers(0, 5), st.one_of(st.none(), st.integers(5, 9))).map(lambda t: ast.Range(*t)),
    st.just(ast.AnyIndex()),
)
LITERALS = st.one_of(
    st.integers(-1000, 1000),
    st.integers(-10000, 10000).map(lambda x: x / 100),
    st.text(st.characters(min_codepoint=32, max_codepoint=126), max_size=8),
    st.booleans(),
    st.none(),
).map(ast.Literal)


def path_refs():
    return st.builds(
        lambda alias, coll, index, sub, attr: ast.Ref(
            (ast.RefPart(alias), ast.RefPart(coll, index)) + ((ast.RefPart(sub),) if sub else ()) + (ast.RefPart(attr),)
        ),
        ALIASES,
        st.sampled_from(["Edges", "Vertexes"]),
        INDEXES,
        st.sampled_from([None, "StartVertex", "EndVertex"]),
        NAMES,
    )


REFS = st.one_of(
    NAMES.map(lambda n: ast.Ref((ast.RefPart(n),))),
    st.tuples(ALIASES, NAMES).map(lambda t: ast.Ref((ast.RefPart(t[0]), ast.RefPart(t[1])))),
    ALIASES.map(lambda a: ast.Ref((ast.RefPart(a), ast.RefPart("Length")))),
    ALIASES.map(lambda a: ast.Ref((ast.RefPart(a), ast.RefPart("StartVertex"), ast.RefPart("Id")))),
    path_refs(),
)
SCALARS = st.one_of(
    LITERALS,
    REFS,
    st.tuples(st.sampled_from(["SUM", "COUNT", "MIN", "MAX", "AVG"]), REFS).map(lambda t: ast.Call(t[0], (t[1],))),
)
COMPARES = st.builds(ast.Compare, st.sampled_from(["=", "<>", "<", "<=", ">", ">="]), SCALARS, SCALARS)
IN_LISTS = st.builds(ast.InList, SCALARS, st.lists(LITERALS, min_size=1, max_size=3).map(tuple), st.booleans())

EXPRS = st.recursive(
    st.one_of(COMPARES, IN_LISTS),
    lambda inner: st.one_of(
        st.builds(ast.And, inner, inner),
        st.builds(ast.Or, inner, inner),
        st.builds(ast.Not, inner),
    ),
    max_leaves=6,
)

FROM_ITEMS = st.one_of(
    st.builds(ast.TableRef, st.sampled_from(["Users", "Roads", "T"]), st.one_of(st.none(), ALIASES)),
    st.builds(ast.GraphRef, st.sampled_from(["SocialNetwork", "G"]), st.sampled_from(["VERTEXES", "EDGES"]), ALIASES),
    st.builds(
        ast.GraphRef,
        st.sampled_from(["SocialNetwork", "G"]),
        st.just("PATHS"),
        ALIASES,
        st.one_of(st.none(), NAMES.map(ast.ShortestPathHint)),
    ),
)

SELECTS = st.builds(
    ast.Select,
    st.lists(st.builds(ast.SelectItem, SCALARS, st.one_of(st.none(), st.just("out"))), max_size=3).map(tuple),
    st.lists(FROM_ITEMS, min_size=1, max_size=3).map(tuple),
    st.one_of(st.none(), EXPRS),
    st.one_of(st.none(), st.integers(0, 50)),
    st.one_of(st.none(), st.integers(0, 50)),
)

SOURCES = st.builds(
    ast.SourceSpec,
    st.sampled_from(["V", "Users"]),
    NAMES,
    st.lists(st.tuples(st.sampled_from(["p", "q", "r"]), NAMES), max_size=3, unique_by=lambda t: t[0]).map(tuple),
    st.none(),
    st.none(),
    st.one_of(st.none(), COMPARES),
)
EDGE_SOURCES = st.builds(
    ast.SourceSpec,
    st.sampled_from(["E", "Roads"]),
    NAMES,
    st.lists(st.tuples(st.sampled_from(["p", "q", "r"]), NAMES), max_size=3, unique_by=lambda t: t[0]).map(tuple),
    NAMES,
    NAMES,
    st.one_of(st.none(), EXPRS),
)
VIEWS = st.builds(
    lambda name, directed, v, e: ast.CreateGraphView(ast.GraphViewDef(name, directed, v, e)),
    st.sampled_from(["G", "Net"]),
    st.booleans(),
    SOURCES,
    EDGE_SOURCES,
)
TEMPS = st.builds(
    lambda v, e, alias, directed: ast.Select(
        (ast.SelectItem(ast.Ref((ast.RefPart(alias), ast.RefPart("Length")))),),
        (ast.TempGraphRef(v, e, alias, None, directed),),
    ),
    SOURCES,
    EDGE_SOURCES,
    ALIASES,
    st.booleans(),
)
DML = st.one_of(
    st.builds(ast.Insert, st.just("T"), st.one_of(st.none(), st.just(("a", "b"))),
              st.lists(st.tuples(LITERALS, LITERALS), min_size=1, max_size=3).map(tuple)),
    st.builds(ast.Update, st.just("T"),
              st.lists(st.tuples(NAMES, SCALARS), min_size=1, max_size=2).map(tuple),
              st.one_of(st.none(), EXPRS)),
    st.builds(ast.Delete, st.just("T"), st.one_of(st.none(), EXPRS)),
    st.builds(ast.CreateTable, st.just("T"),
              st.lists(st.builds(ast.ColumnDef, NAMES, st.sampled_from(["INTEGER", "FLOAT", "TEXT", "BOOLEAN"])),
                       min_size=1, max_size=3, unique_by=lambda c: c.name.lower()).map(tuple)),
)


class TestRoundTrip:
    @settings(max_examples=300, deadline=None)
    @given(SELECTS)
    def test_select(self, stmt):
        assert parse(to_sql(stmt)) == stmt

    @settings(max_examples=100, deadline=None)
    @given(VIEWS)
    def test_graph_view(self, stmt):
        assert parse(to_sql(stmt)) == stmt

    @settings(max_examples=100, deadline=None)
    @given(TEMPS)
    def test_tempgraph(self, stmt):
        assert parse(to_sql(stmt)) == stmt

    @settings(max_examples=150, deadline=None)
    @given(DML)
    def test_dml_and_ddl(self, stmt):
        assert parse(to_sql(stmt)) == stmt

    @settings(max_examples=100, deadline=None)
    @given(SELECTS)
    def test_explain(self, stmt):
        wrapped = ast.Explain(stmt)
        assert parse(to_sql(wrapped)) == wrapped
