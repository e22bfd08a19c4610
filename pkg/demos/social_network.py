"""Relational rows joined with graph traversals on the bundled sample data."""

from graphrel import Database
from graphrel.cli import format_table, sample_script

QUERIES = {
    "friends-of-friends of lawyers": """
        SELECT U.lName, PS.EndVertex.lstName, PS.PathString
        FROM Users U, SocialNetwork.Paths PS
        WHERE U.Job = 'Lawyer' AND PS.StartVertex.Id = U.uId AND PS.Length = 2""",
    "people named Smith": """
        SELECT VS.Id, VS.birthdate, VS.fanOut
        FROM SocialNetwork.Vertexes VS WHERE VS.lstName = 'Smith'""",
    "relatives reachable in up to three hops from user 5": """
        SELECT PS.EndVertex.lstName, PS.Length
        FROM SocialNetwork.Paths PS
        WHERE PS.StartVertex.Id = 5 AND PS.Length <= 3 AND PS.Edges.relative = TRUE""",
}


def main():
    db = Database()
    db.script(sample_script())
    for title, sql in QUERIES.items():
        print(f"-- {title}")
        print(db.explain(sql))
        result = db.execute(sql)
        for line in format_table(result.columns, result.rows):
            print(line)
        print()


if __name__ == "__main__":
    main()
