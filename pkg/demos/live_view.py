"""A graph view tracks inserts, deletes and updates on its source tables."""

from graphrel import Database

db = Database()
db.script("""
CREATE TABLE Stops (sid INTEGER, name TEXT);
CREATE TABLE Legs (lid INTEGER, a INTEGER, b INTEGER, minutes INTEGER);
INSERT INTO Stops VALUES (1, 'depot'), (2, 'market'), (3, 'harbour');
INSERT INTO Legs VALUES (10, 1, 2, 7), (11, 2, 3, 4), (12, 3, 4, 9);
CREATE DIRECTED GRAPH VIEW Transit
  VERTEXES(ID = sid, name = name) FROM Stops
  EDGES(ID = lid, FROM = a, TO = b, minutes = minutes) FROM Legs;
""")

REACH = "SELECT PS.PathString FROM Transit.Paths PS WHERE PS.StartVertex.Id = 1"
view = db.graph_view("Transit")


def report(label):
    print(f"{label}: {len(view.vertices)} vertexes, {len(view.edges)} edges, {len(view.dangling)} dangling")
    for (path,) in db.query(REACH):
        print("   ", path)


report("initial (leg 12 waits for stop 4)")
db.execute("INSERT INTO Stops VALUES (4, 'airport')")
report("after adding stop 4")
db.execute("DELETE FROM Legs WHERE lid = 11")
report("after closing leg 11")
db.execute("UPDATE Legs SET a = 1 WHERE lid = 12")
report("after rerouting leg 12 from the depot")
db.execute("UPDATE Legs SET minutes = 99 WHERE lid = 10")
report("after a timetable change (topology untouched)")
