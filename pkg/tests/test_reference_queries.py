import networkx as nx
import pytest

from graphrel import Database
from graphrel.cli import sample_script

SOCIAL_VIEW = """CREATE UNDIRECTED GRAPH VIEW SocialNetwork
VERTEXES(ID = uId, lstName = lName, birthdate = dob) FROM Users
EDGES (ID = relId, FROM = uId1, TO = uId2, sDate = startDate, relative = isRelative) FROM Relationships"""

LAWYER_CIRCLE = """SELECT PS.EndVertex.lstName FROM Users U, SocialNetwork.Paths PS
WHERE U.Job = 'Lawyer' AND PS.StartVertex.Id = U.uId AND PS.Length = 2
AND PS.Edges[0..*].StartDate > '1/1/2000'"""

PROTEIN_LINK = """SELECT PS.PathString FROM Proteins Pr1, Proteins Pr2, BioNetwork.Paths PS
WHERE Pr1.Name = 'Protein X' AND Pr2.Name = 'Protein Y'
AND PS.StartVertex.Id = Pr1.Id AND PS.EndVertex.Id = Pr2.Id
AND PS.Edges[0..*].Type IN ('covalent', 'stable') LIMIT 1"""

ABC_TRIANGLES = """SELECT Count(P) FROM MLGraph.Paths P
Where P.Length = 3 AND P.Edges[0].Label = 'A' AND P.Edges[1].Label = 'B' AND P.Edges[2].Label = 'C'
AND P.Edges[2].EndVertex = P.Edges[0].StartVertex"""

TOP_ROUTES = """SELECT TOP 2 PS
FROM RoadNetwork.Paths PS HINT(SHORTESTPATH(Distance)), RoadNetwork.Vertexes Src, RoadNetwork.Vertexes Dest
WHERE PS.StartVertex.Id = Src.Id AND PS.EndVertex.Id = Dest.Id
AND Src.Address = "Address 1" AND Dest.Address = "Address 2\""""

PATIENT_ROUTES = """SELECT Patient.Name, Patient.EMail, PS.PathString
FROM Patient, Locations Dest,
TEMPGRAPH(VERTEXES (ID = LocId) FROM Locations
  EDGES(ID = rId, FROM = rStart, TO = rEnd, Distance = rDist) FROM Roads
  WHERE Roads.Type NOT IN (SELECT Type FROM UAvoidance WHERE UAvoidance.UserId = Patient.Id)).Paths PS
  HINT(SHORTESTPATH(Distance))
WHERE PS.StartVertex.Id = Patient.LocationId AND PS.EndVertex.Id = Dest.Id
AND Dest.Address = "Address 1" AND Patient.City = "San Francisco\""""

FAST_ROADS = """SELECT PS.PathString FROM RoadNetwork.Paths PS HINT(SHORTESTPATH(Distance))
WHERE PS.Edges.SpeedLimit > 30 AND PS.StartVertex.Id = 1 AND PS.EndVertex.Id = 10"""


@pytest.fixture(scope="module")
def db():
    d = Database()
    d.script(sample_script())
    return d


def nx_graph(db, table, src, dst, directed, **attrs):
    t = db.table(table)
    pos = {c: t.schema.position(c) for c in (src, dst, *attrs.values())}
    g = nx.MultiDiGraph() if directed else nx.MultiGraph()
    for row in t.rows():
        g.add_edge(row[pos[src]], row[pos[dst]], key=row[0], **{k: row[pos[c]] for k, c in attrs.items()})
    return g


def render(start, hops):
    out = str(start)
    for eid, v in hops:
        out += f" -e{eid}-> {v}"
    return out


def weighted_order(g, s, t, weight, keep=lambda d: True):
    found = []
    for p in nx.all_simple_edge_paths(g, s, t):
        data = [g.edges[e] for e in p]
        if all(keep(d) for d in data):
            found.append((sum(d[weight] for d in data), render(s, [(k, b) for _, b, k in p])))
    return sorted(found)


class TestReferenceQueries:
    def test_social_view_created(self):
        d = Database()
        d.script("CREATE TABLE Users (uId INTEGER, lName TEXT, dob TEXT, Job TEXT);"
                 "CREATE TABLE Relationships (relId INTEGER, uId1 INTEGER, uId2 INTEGER, startDate TEXT, "
                 "isRelative BOOLEAN)")
        d.execute(SOCIAL_VIEW)
        view = d.graph_view("SocialNetwork")
        assert not view.directed
        assert len(view.vertices) == 0

    def test_lawyer_circle(self, db):
        g = nx_graph(db, "Relationships", "uId1", "uId2", False, date="startDate")
        users = {r[0]: r for r in db.table("Users").rows()}
        want = []
        for uid, row in users.items():
            if row[3] != "Lawyer":
                continue
            ends = [v for v in g if v != uid]
            for p in nx.all_simple_edge_paths(g, uid, ends, cutoff=2):
                if len(p) == 2 and all(g.edges[e]["date"] > "1/1/2000" for e in p):
                    want.append(users[p[-1][1]][1])
        got = [r[0] for r in db.query(LAWYER_CIRCLE)]
        assert sorted(got) == sorted(want)
        assert len(got) == 6

    def test_protein_link(self, db):
        g = nx_graph(db, "Interactions", "p1", "p2", False, kind="Type")
        allowed = {
            render(1, [(k, b) for _, b, k in p])
            for p in nx.all_simple_edge_paths(g, 1, 5)
            if all(g.edges[e]["kind"] in ("covalent", "stable") for e in p)
        }
        rows = db.query(PROTEIN_LINK)
        assert len(rows) == 1
        assert rows[0][0] in allowed

    def test_protein_link_stops_early(self, db):
        db.query(PROTEIN_LINK)
        limited = db.last_counters.expansions
        db.query(PROTEIN_LINK.replace(" LIMIT 1", ""))
        full = db.last_counters.expansions
        assert limited < full
        assert limited <= 4

    def test_abc_triangles(self, db):
        g = nx_graph(db, "MLLinks", "lSrc", "lDst", True, label="Label")
        count = 0
        for u, v, k1, d1 in g.edges(keys=True, data=True):
            for _, w, k2, d2 in g.out_edges(v, keys=True, data=True):
                for _, x, k3, d3 in g.out_edges(w, keys=True, data=True):
                    if x == u and len({u, v, w}) == 3 and (d1["label"], d2["label"], d3["label"]) == ("A", "B", "C"):
                        count += 1
        assert db.query(ABC_TRIANGLES) == [(count,)]
        assert count == 2

    def test_top_routes(self, db):
        g = nx_graph(db, "Roads", "rStart", "rEnd", True, dist="rDist")
        want = [s for _, s in weighted_order(g, 1, 2, "dist")[:2]]
        assert [r[0] for r in db.query(TOP_ROUTES)] == want

    def test_patient_routes(self, db):
        g = nx_graph(db, "Roads", "rStart", "rEnd", True, dist="rDist", kind="Type")
        avoid = {}
        for uid, kind in db.table("UAvoidance").rows():
            avoid.setdefault(uid, set()).add(kind)
        want = []
        for pid, name, email, loc, city in db.table("Patient").rows():
            if city != "San Francisco":
                continue
            ranked = weighted_order(g, loc, 1, "dist", keep=lambda d: d["kind"] not in avoid.get(pid, set()))
            want += [(name, email, s) for _, s in ranked]
        assert db.query(PATIENT_ROUTES) == want
        assert db.last_counters.tempgraph_builds == 3

    def test_fast_roads(self, db):
        g = nx_graph(db, "Roads", "rStart", "rEnd", True, dist="rDist", speed="SpeedLimit")
        ranked = weighted_order(g, 1, 10, "dist", keep=lambda d: d["speed"] > 30)
        got = [r[0] for r in db.query(FAST_ROADS)]
        assert got == [s for _, s in ranked]
        assert len(got) == 3

    @pytest.mark.parametrize("sql", [
        LAWYER_CIRCLE, PROTEIN_LINK, ABC_TRIANGLES, TOP_ROUTES, PATIENT_ROUTES, FAST_ROADS,
    ])
    def test_explains(self, db, sql):
        plan = db.explain(sql)
        assert "PathScan" in plan
