"""Recursive-descent parser producing :mod:`graphrel.sql.ast` nodes."""

from __future__ import annotations

from ..errors import ParseError
from . import ast
from .lexer import EOF, IDENT, NUMBER, OP, STRING, Token, tokenize

RESERVED = frozenset(
    """SELECT FROM WHERE AND OR NOT IN LIMIT TOP AS HINT CREATE TABLE GRAPH VIEW
    VERTEXES EDGES PATHS DIRECTED UNDIRECTED TEMPGRAPH INSERT INTO VALUES UPDATE
    SET DELETE EXPLAIN NULL TRUE FALSE""".split()
)

_COMPARE = ("=", "<>", "<", "<=", ">", ">=")


class Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # -- token helpers -------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != EOF:
            self.pos += 1
        return tok

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.column, tok.text)

    def accept_kw(self, *words: str) -> Token | None:
        if self.tok.is_kw(*words):
            return self.advance()
        return None

    def expect_kw(self, word: str) -> Token:
        if not self.tok.is_kw(word):
            raise self.error(f"expected {word}, found {self.tok.text}")
        return self.advance()

    def accept_op(self, op: str) -> Token | None:
        if self.tok.is_op(op):
            return self.advance()
        return None

    def expect_op(self, op: str) -> Token:
        if not self.tok.is_op(op):
            raise self.error(f"expected '{op}', found {self.tok.text}")
        return self.advance()

    def ident(self, what: str = "identifier", allow_reserved: bool = False) -> str:
        tok = self.tok
        if tok.kind != IDENT or (not allow_reserved and tok.value.upper() in RESERVED):
            raise self.error(f"expected {what}, found {tok.text}")
        self.advance()
        return tok.value

    def integer(self, what: str = "integer") -> int:
        tok = self.tok
        if tok.kind != NUMBER or not isinstance(tok.value, int):
            raise self.error(f"expected {what}, found {tok.text}")
        self.advance()
        return tok.value

    def optional_alias(self) -> str | None:
        if self.accept_kw("AS"):
            return self.ident("alias")
        if self.tok.kind == IDENT and self.tok.value.upper() not in RESERVED:
            return self.advance().value
        return None

    # -- statements ------------------------------------------------------------

    def statement(self) -> ast.Statement:
        tok = self.tok
        if tok.kind == EOF:
            raise self.error("empty statement")
        if tok.is_kw("SELECT"):
            stmt = self.select()
        elif tok.is_kw("EXPLAIN"):
            self.advance()
            stmt = ast.Explain(self.select())
        elif tok.is_kw("CREATE"):
            stmt = self.create()
        elif tok.is_kw("INSERT"):
            stmt = self.insert()
        elif tok.is_kw("UPDATE"):
            stmt = self.update()
        elif tok.is_kw("DELETE"):
            stmt = self.delete()
        else:
            raise self.error(f"unexpected {tok.text} at start of statement")
        self.accept_op(";")
        if self.tok.kind != EOF:
            raise self.error(f"unexpected {self.tok.text} after end of statement")
        return stmt

    def select(self) -> ast.Select:
        self.expect_kw("SELECT")
        top = None
        if self.accept_kw("TOP"):
            top = self.integer("row count after TOP")
        items: list[ast.SelectItem] = []
        if self.accept_op("*"):
            pass
        else:
            while True:
                expr = self.expr()
                items.append(ast.SelectItem(expr, self.optional_alias()))
                if not self.accept_op(","):
                    break
        self.expect_kw("FROM")
        froms = [self.from_item()]
        while self.accept_op(","):
            froms.append(self.from_item())
        where = self.expr() if self.accept_kw("WHERE") else None
        limit = None
        if self.accept_kw("LIMIT"):
            limit = self.integer("row count after LIMIT")
        return ast.Select(tuple(items), tuple(froms), where, top, limit)

    def from_item(self) -> ast.FromItem:
        if self.accept_kw("TEMPGRAPH"):
            self.expect_op("(")
            directed = True
            if self.accept_kw("UNDIRECTED"):
                directed = False
            else:
                self.accept_kw("DIRECTED")
            vertexes = self.source_clause("VERTEXES")
            edges = self.source_clause("EDGES")
            self.expect_op(")")
            self.expect_op(".")
            if not self.accept_kw("PATHS"):
                raise self.error("TEMPGRAPH only exposes PATHS")
            alias = self.optional_alias()
            if alias is None:
                raise self.error("TEMPGRAPH paths need an alias")
            return ast.TempGraphRef(vertexes, edges, alias, self.hint(), directed)
        name = self.ident("table or graph view name")
        if self.tok.is_op(".") and self.peek().is_kw("PATHS", "VERTEXES", "EDGES"):
            self.advance()
            kind = self.advance().value.upper()
            alias = self.optional_alias()
            if alias is None:
                raise self.error(f"{name}.{kind} needs an alias")
            hint = self.hint()
            if hint is not None and kind != "PATHS":
                raise self.error("SHORTESTPATH hints apply to PATHS only")
            return ast.GraphRef(name, kind, alias, hint)
        return ast.TableRef(name, self.optional_alias())

    def hint(self) -> ast.ShortestPathHint | None:
        if not self.accept_kw("HINT"):
            return None
        self.expect_op("(")
        if not self.accept_kw("SHORTESTPATH"):
            raise self.error("unknown hint")
        self.expect_op("(")
        attr = self.ident("weight attribute")
        self.expect_op(")")
        self.expect_op(")")
        return ast.ShortestPathHint(attr)

    def source_clause(self, side: str) -> ast.SourceSpec:
        self.expect_kw(side)
        self.expect_op("(")
        bindings: dict[str, str] = {}
        attrs: list[tuple[str, str]] = []
        while True:
            name_tok = self.tok
            name = self.ident("binding name", allow_reserved=True)
            self.expect_op("=")
            column = self.ident("column name", allow_reserved=True)
            key = name.upper()
            if key in ("ID", "FROM", "TO") and (key == "ID" or side == "EDGES"):
                if key in bindings:
                    raise self.error(f"duplicate {key} binding", name_tok)
                bindings[key] = column
            else:
                if any(a.lower() == name.lower() for a, _ in attrs):
                    raise self.error(f"duplicate attribute alias {name}", name_tok)
                attrs.append((name, column))
            if not self.accept_op(","):
                break
        self.expect_op(")")
        required = ("ID", "FROM", "TO") if side == "EDGES" else ("ID",)
        for key in required:
            if key not in bindings:
                raise self.error(f"{side} clause is missing its {key} binding")
        self.expect_kw("FROM")
        table = self.ident("source table")
        where = self.expr() if self.accept_kw("WHERE") else None
        return ast.SourceSpec(
            table, bindings["ID"], tuple(attrs), bindings.get("FROM"), bindings.get("TO"), where
        )

    def create(self) -> ast.Statement:
        self.expect_kw("CREATE")
        if self.accept_kw("TABLE"):
            name = self.ident("table name")
            self.expect_op("(")
            cols = []
            while True:
                cname = self.ident("column name")
                ctype = self.ident("column type", allow_reserved=True)
                cols.append(ast.ColumnDef(cname, ctype))
                if not self.accept_op(","):
                    break
            self.expect_op(")")
            return ast.CreateTable(name, tuple(cols))
        if self.tok.is_kw("DIRECTED", "UNDIRECTED"):
            directed = self.advance().value.upper() == "DIRECTED"
        elif self.tok.is_kw("GRAPH"):
            raise self.error("graph views must be declared DIRECTED or UNDIRECTED")
        else:
            raise self.error(f"expected TABLE or graph view kind, found {self.tok.text}")
        self.expect_kw("GRAPH")
        self.expect_kw("VIEW")
        name = self.ident("graph view name")
        vertexes = self.source_clause("VERTEXES")
        edges = self.source_clause("EDGES")
        return ast.CreateGraphView(ast.GraphViewDef(name, directed, vertexes, edges))

    def insert(self) -> ast.Insert:
        self.expect_kw("INSERT")
        self.expect_kw("INTO")
        table = self.ident("table name")
        columns = None
        if self.accept_op("("):
            names = [self.ident("column name")]
            while self.accept_op(","):
                names.append(self.ident("column name"))
            self.expect_op(")")
            columns = tuple(names)
        self.expect_kw("VALUES")
        rows = []
        while True:
            self.expect_op("(")
            values = [self.expr()]
            while self.accept_op(","):
                values.append(self.expr())
            self.expect_op(")")
            rows.append(tuple(values))
            if not self.accept_op(","):
                break
        return ast.Insert(table, columns, tuple(rows))

    def update(self) -> ast.Update:
        self.expect_kw("UPDATE")
        table = self.ident("table name")
        self.expect_kw("SET")
        assignments = []
        while True:
            col = self.ident("column name")
            self.expect_op("=")
            assignments.append((col, self.expr()))
            if not self.accept_op(","):
                break
        where = self.expr() if self.accept_kw("WHERE") else None
        return ast.Update(table, tuple(assignments), where)

    def delete(self) -> ast.Delete:
        self.expect_kw("DELETE")
        self.expect_kw("FROM")
        table = self.ident("table name")
        where = self.expr() if self.accept_kw("WHERE") else None
        return ast.Delete(table, where)

    # -- expressions -------------------------------------------------------------

    def expr(self) -> ast.Expr:
        left = self.conjunction()
        while self.accept_kw("OR"):
            left = ast.Or(left, self.conjunction())
        return left

    def conjunction(self) -> ast.Expr:
        left = self.negation()
        while self.accept_kw("AND"):
            left = ast.And(left, self.negation())
        return left

    def negation(self) -> ast.Expr:
        if self.accept_kw("NOT"):
            return ast.Not(self.negation())
        return self.predicate()

    def predicate(self) -> ast.Expr:
        left = self.operand()
        if self.tok.kind == OP and self.tok.value in _COMPARE:
            op = self.advance().value
            return ast.Compare(op, left, self.operand())
        negated = False
        if self.tok.is_kw("NOT") and self.peek().is_kw("IN"):
            self.advance()
            negated = True
        if self.accept_kw("IN"):
            self.expect_op("(")
            if self.tok.is_kw("SELECT"):
                query = self.select()
                self.expect_op(")")
                return ast.InSelect(left, query, negated)
            items = [self.expr()]
            while self.accept_op(","):
                items.append(self.expr())
            self.expect_op(")")
            return ast.InList(left, tuple(items), negated)
        if negated:
            raise self.error("expected IN after NOT")
        return left

    def operand(self) -> ast.Expr:
        tok = self.tok
        if tok.is_op("-") or tok.is_op("+"):
            self.advance()
            num = self.tok
            if num.kind != NUMBER:
                raise self.error("expected a number after sign")
            self.advance()
            return ast.Literal(-num.value if tok.value == "-" else num.value)
        if tok.kind == NUMBER:
            self.advance()
            return ast.Literal(tok.value)
        if tok.kind == STRING:
            self.advance()
            return ast.Literal(tok.value)
        if tok.is_kw("NULL"):
            self.advance()
            return ast.Literal(None)
        if tok.is_kw("TRUE", "FALSE"):
            self.advance()
            return ast.Literal(tok.value.upper() == "TRUE")
        if tok.is_op("("):
            self.advance()
            inner = self.expr()
            self.expect_op(")")
            return inner
        if tok.kind == IDENT and self.peek().is_op("("):
            return self.call()
        if tok.kind == IDENT:
            return self.ref()
        raise self.error(f"unexpected {tok.text}")

    def call(self) -> ast.Call:
        name_tok = self.advance()
        name = name_tok.value.upper()
        if name not in ast.AGGREGATES:
            raise self.error(f"unknown function {name_tok.value}", name_tok)
        self.expect_op("(")
        if self.accept_op("*"):
            if name != "COUNT":
                raise self.error(f"{name}(*) is not supported")
            args: tuple = (ast.Star(),)
        else:
            args = (self.expr(),)
        self.expect_op(")")
        return ast.Call(name, args)

    def ref(self) -> ast.Ref:
        if self.tok.value.upper() in RESERVED:
            raise self.error(f"unexpected {self.tok.text}")
        parts = [self.ref_part(self.advance().value)]
        while self.tok.is_op(".") and self.peek().kind == IDENT:
            self.advance()
            parts.append(self.ref_part(self.advance().value))
        return ast.Ref(tuple(parts))

    def ref_part(self, name: str) -> ast.RefPart:
        if not self.accept_op("["):
            return ast.RefPart(name)
        if self.accept_kw("ANY"):
            index: ast.Index = ast.AnyIndex()
        else:
            lo = self.integer("index")
            if self.accept_op(".."):
                if self.accept_op("*"):
                    index = ast.Range(lo, None)
                else:
                    hi_tok = self.tok
                    hi = self.integer("range end")
                    if hi < lo:
                        raise self.error("range end precedes range start", hi_tok)
                    index = ast.Range(lo, hi)
            else:
                index = ast.Single(lo)
        self.expect_op("]")
        return ast.RefPart(name, index)


def _meta(text: str) -> ast.MetaCommand:
    words = text.strip().rstrip(";").split()
    return ast.MetaCommand(words[0][1:].lower(), tuple(words[1:]))


def parse(text: str, line: int = 1) -> ast.Statement:
    """Parse one statement (a trailing ``;`` is optional)."""
    if text.strip().startswith("."):
        return _meta(text)
    return Parser(tokenize(text, line)).statement()


def parse_expression(text: str) -> ast.Expr:
    p = Parser(tokenize(text))
    expr = p.expr()
    if p.tok.kind != EOF:
        raise p.error(f"unexpected {p.tok.text} after expression")
    return expr


def split_script(text: str) -> list[tuple[int, str]]:
    """Split a script into ``(first line, statement text)`` chunks.

    Statements end at a top-level ``;``. A line starting with ``.`` between
    statements is a meta-command and needs no terminator.
    """
    chunks: list[tuple[int, str]] = []
    buf: list[str] = []
    start = 0
    lines = text.splitlines()
    for lineno, raw in enumerate(lines, 1):
        if not buf or not _has_tokens("\n".join(buf)):
            buf = []
            if raw.strip().startswith("."):
                chunks.append((lineno, raw.strip()))
                continue
            if not raw.strip():
                continue
            start = lineno
        buf.append(raw)
        pending = "\n".join(buf)
        try:
            toks = tokenize(pending, start)
        except ParseError:
            continue  # unterminated string: keep reading
        cut = [t for t in toks if t.is_op(";")]
        while cut:
            # split after the first terminator, re-scan the remainder
            first = cut[0]
            offset = _offset(pending, first.line - start, first.column)
            chunks.append((start, pending[: offset + 1]))
            rest = pending[offset + 1:]
            start = first.line
            if not rest.strip():
                buf = []
                break
            # the remainder starts on the terminator's line
            skipped = len(rest) - len(rest.lstrip())
            start += rest[:skipped].count("\n")
            pending = rest.lstrip()
            buf = [pending]
            try:
                toks = tokenize(pending, start)
            except ParseError:
                break
            cut = [t for t in toks if t.is_op(";")]
    tail = "\n".join(buf)
    if tail.strip() and _has_tokens(tail):
        chunks.append((start, tail))
    return chunks


def _has_tokens(text: str) -> bool:
    try:
        return len(tokenize(text)) > 1
    except ParseError:
        return True


def _offset(text: str, line_index: int, column: int) -> int:
    pos = 0
    for _ in range(line_index):
        pos = text.index("\n", pos) + 1
    return pos + column - 1


def parse_script(text: str) -> list[tuple[int, ast.Statement]]:
    """Parse every statement of a script, returning ``(line, statement)`` pairs."""
    out = []
    for line, chunk in split_script(text):
        out.append((line, parse(chunk, line)))
    return out
