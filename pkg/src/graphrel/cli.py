"""Command-line shell: REPL, script runner, CSV loading and benchmarks.

Start-up work runs in this order: ``--sample``, ``--init`` scripts, ``--csv``
loads, ``--script``, ``--bench``. Without ``--script`` or ``--bench`` the
shell reads statements from stdin.
"""

from __future__ import annotations

import argparse
import csv
import sys
from importlib import resources
from pathlib import Path
from typing import TextIO

from .bench import CSV_HEADER, BenchError, parse_spec, run_bench
from .engine import Database, Result, ScriptError
from .errors import EngineError, ParseError
from .graphview import PathValue, path_string
from .sql.lexer import EOF, tokenize
from .sql.parser import parse, split_script

EXIT_OK = 0
EXIT_STATEMENT = 1
EXIT_USAGE = 2
EXIT_CHECKSUM = 3

HELP = """\
Statements end with ';'. Commands:
  .tables                 list tables
  .views                  list graph views
  .analyze [view ...]     recompute fan-out statistics
  .load <table> <path>    load a CSV file into a table
  .read <path>            run a script file
  .timing on|off          print elapsed time after each statement
  .output table|csv       result format
  .help                   this text
  .quit                   leave the shell"""


def sample_script() -> str:
    return resources.files("graphrel").joinpath("data/sample.sql").read_text(encoding="utf-8")


def format_value(v) -> str:
    if v is None:
        return "NULL"
    if isinstance(v, bool):
        return "TRUE" if v else "FALSE"
    if isinstance(v, PathValue):
        return path_string(v.view, v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(format_value(x) for x in v) + "]"
    return str(v)


def format_table(columns: list[str], rows: list[tuple]) -> list[str]:
    cells = [[format_value(v) for v in row] for row in rows]
    widths = [len(c) for c in columns]
    for row in cells:
        for i, c in enumerate(row):
            widths[i] = max(widths[i], len(c))
    lines = [" | ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip()]
    lines.append("-+-".join("-" * w for w in widths))
    for row in cells:
        lines.append(" | ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return lines


class Session:
    def __init__(self, db: Database | None = None, out: TextIO | None = None, err: TextIO | None = None):
        self.db = db or Database()
        self.out = out or sys.stdout
        self.err = err or sys.stderr
        self.timing = False
        self.output = "table"

    def print(self, text: str = "") -> None:
        self.out.write(text + "\n")

    def error(self, text: str) -> None:
        self.err.write(f"error: {text}\n")

    def show(self, result: Result) -> None:
        if result.is_query:
            if self.output == "csv":
                w = csv.writer(self.out, lineterminator="\n")
                w.writerow(result.columns)
                w.writerows([format_value(v) for v in row] for row in result.rows)
            else:
                for line in format_table(result.columns, result.rows):
                    self.print(line)
                self.print(f"{len(result.rows)} row(s)")
        else:
            self.print(result.message)
        for w in result.warnings:
            self.print(f"warning: {w}")
        if self.timing:
            self.print(f"elapsed: {result.elapsed_ms:.3f} ms")

    def shell_command(self, text: str) -> bool:
        """Handle commands that belong to the shell; False passes to the engine."""
        words = text.split()
        name = words[0].lower()
        if name in (".quit", ".exit"):
            raise SystemExit(EXIT_OK)
        if name == ".help":
            self.print(HELP)
            return True
        if name == ".timing":
            if len(words) != 2 or words[1].lower() not in ("on", "off"):
                self.error("usage: .timing on|off")
            else:
                self.timing = words[1].lower() == "on"
            return True
        if name == ".output":
            if len(words) != 2 or words[1].lower() not in ("table", "csv"):
                self.error("usage: .output table|csv")
            else:
                self.output = words[1].lower()
            return True
        if name == ".read":
            if len(words) != 2:
                self.error("usage: .read <path>")
            else:
                self.run_script(words[1])
            return True
        return False

    def execute(self, text: str, line: int = 1) -> bool:
        """Run one statement or command and print its result; False on error."""
        if text.startswith(".") and self.shell_command(text):
            return True
        try:
            self.show(self.db.execute(parse(text, line)))
        except EngineError as exc:
            self.error(str(exc))
            return False
        return True

    def run_text(self, text: str, stop_on_error: bool = True) -> int:
        for line, chunk in split_script(text):
            if not self.execute(chunk, line) and stop_on_error:
                self.err.write(f"script aborted at line {line}\n")
                return EXIT_STATEMENT
        return EXIT_OK

    def run_script(self, path: str) -> int:
        p = Path(path)
        if not p.is_file():
            self.error(f"no such script: {path}")
            return EXIT_USAGE
        return self.run_text(p.read_text(encoding="utf-8"))

    def repl(self, stdin: TextIO | None = None) -> int:
        stdin = stdin or sys.stdin
        interactive = stdin.isatty()
        buf: list[str] = []
        while True:
            if interactive:
                self.out.write("graphrel> " if not buf else "     ...> ")
                self.out.flush()
            raw = stdin.readline()
            if not raw:
                break
            line = raw.rstrip("\n")
            if not buf:
                if not line.strip():
                    continue
                if line.strip().startswith("."):
                    self.execute(line.strip())
                    continue
            buf.append(line)
            text = "\n".join(buf)
            if not _complete(text):
                continue
            buf = []
            for lineno, chunk in split_script(text):
                self.execute(chunk, lineno)
        if buf and "\n".join(buf).strip():
            self.error("incomplete statement at end of input (missing ';')")
        return EXIT_OK


def _complete(text: str) -> bool:
    try:
        toks = tokenize(text)
    except ParseError:
        return False  # e.g. an open string literal
    real = [t for t in toks if t.kind != EOF]
    return bool(real) and real[-1].is_op(";")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="graphrel", description="In-memory relational engine with graph views.")
    ap.add_argument("--sample", action="store_true", help="load the bundled sample database first")
    ap.add_argument("--init", action="append", default=[], metavar="PATH", help="script run before CSV loads")
    ap.add_argument("--csv", action="append", default=[], metavar="TABLE=PATH", help="load a CSV file (repeatable)")
    ap.add_argument("--script", metavar="PATH", help="run a script and exit")
    ap.add_argument("--bench", metavar="SPEC", help="run a benchmark spec and exit")
    ap.add_argument("--output", choices=("table", "csv"), default="table")
    ap.add_argument("--timing", action="store_true", help="print elapsed time after each statement")
    return ap


def _bench(session: Session, text: str) -> int:
    try:
        spec = parse_spec(text)
    except BenchError as exc:
        session.error(str(exc))
        return EXIT_USAGE
    rows, agree = run_bench(spec)
    if session.output == "csv":
        session.print(CSV_HEADER)
        for r in rows:
            session.print(r.csv())
    else:
        table = [(r.strategy, r.kind, r.param, f"{r.mean_ms:.3f}", r.checksum) for r in rows]
        for line in format_table(CSV_HEADER.split(","), table):
            session.print(line)
    if not agree:
        session.error("checksum mismatch between strategies")
        return EXIT_CHECKSUM
    return EXIT_OK


def main(argv: list[str] | None = None, stdin: TextIO | None = None, out: TextIO | None = None,
         err: TextIO | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    loads = []
    for item in args.csv:
        table, sep, path = item.partition("=")
        if not sep or not table or not path:
            (err or sys.stderr).write(f"error: --csv expects TABLE=PATH, got {item!r}\n")
            return EXIT_USAGE
        loads.append((table, path))

    session = Session(out=out, err=err)
    session.output = args.output
    session.timing = args.timing
    try:
        if args.sample:
            try:
                session.db.script(sample_script())
            except ScriptError as exc:
                session.error(f"sample database: {exc}")
                return EXIT_STATEMENT
        for path in args.init:
            code = session.run_script(path)
            if code != EXIT_OK:
                return code
        for table, path in loads:
            try:
                n = session.db.load_csv(table, path)
            except EngineError as exc:
                session.error(f"{path}: {exc}")
                return EXIT_STATEMENT
            session.print(f"{n} row(s) loaded into {table}")
        if args.script:
            code = session.run_script(args.script)
            if code != EXIT_OK or not args.bench:
                return code
        if args.bench:
            return _bench(session, args.bench)
        return session.repl(stdin)
    except SystemExit as exc:
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
