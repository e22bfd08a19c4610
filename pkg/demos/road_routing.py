"""Shortest routes, with and without per-patient road restrictions."""

from graphrel import Database
from graphrel.cli import format_table, sample_script

TOP_ROUTES = """
SELECT TOP 3 PS, SUM(PS.Edges.Distance)
FROM RoadNetwork.Paths PS HINT(SHORTESTPATH(Distance))
WHERE PS.StartVertex.Id = 1 AND PS.EndVertex.Id = 10"""

# one transient graph per patient, minus the road types they avoid
PER_PATIENT = """
SELECT Patient.Name, PS.PathString, SUM(PS.Edges.Distance)
FROM Patient, Locations Dest,
  TEMPGRAPH(VERTEXES (ID = LocId) FROM Locations
    EDGES(ID = rId, FROM = rStart, TO = rEnd, Distance = rDist) FROM Roads
    WHERE Roads.Type NOT IN (SELECT Type FROM UAvoidance WHERE UAvoidance.UserId = Patient.Id)).Paths PS
  HINT(SHORTESTPATH(Distance))
WHERE PS.StartVertex.Id = Patient.LocationId AND PS.EndVertex.Id = Dest.Id AND Dest.Address = 'Address 1'"""


def show(db, sql):
    print(db.explain(sql))
    result = db.execute(sql)
    for line in format_table(result.columns, result.rows):
        print(line)
    print(f"({db.last_counters.expansions} expansions, {db.last_counters.tempgraph_builds} temp graphs)\n")


def main():
    db = Database()
    db.script(sample_script())
    show(db, TOP_ROUTES)
    show(db, PER_PATIENT)


if __name__ == "__main__":
    main()
