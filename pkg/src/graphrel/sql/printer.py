"""Render AST nodes back to SQL text that parses to an equal tree."""

from __future__ import annotations

from functools import singledispatch

from . import ast


def _literal(value) -> str:
    if value is None:
        return "NULL"
    if value is True:
        return "TRUE"
    if value is False:
        return "FALSE"
    if isinstance(value, str):
        return "'" + value.replace("'", "''") + "'"
    return repr(value)


def _index(index) -> str:
    if isinstance(index, ast.Single):
        return f"[{index.position}]"
    if isinstance(index, ast.Range):
        hi = "*" if index.hi is None else index.hi
        return f"[{index.lo}..{hi}]"
    return "[ANY]"


_ATOMS = (ast.Literal, ast.Ref, ast.Call, ast.Star)


def _operand(expr) -> str:
    text = to_sql(expr)
    return text if isinstance(expr, _ATOMS) else f"({text})"


@singledispatch
def to_sql(node) -> str:
    raise TypeError(f"cannot render {type(node).__name__}")


@to_sql.register
def _(node: ast.Literal) -> str:
    return _literal(node.value)


@to_sql.register
def _(node: ast.Ref) -> str:
    return ".".join(p.name + (_index(p.index) if p.index is not None else "") for p in node.parts)


@to_sql.register
def _(node: ast.Star) -> str:
    return "*"


@to_sql.register
def _(node: ast.Compare) -> str:
    return f"{_operand(node.left)} {node.op} {_operand(node.right)}"


@to_sql.register
def _(node: ast.InList) -> str:
    kw = "NOT IN" if node.negated else "IN"
    return f"{_operand(node.operand)} {kw} ({', '.join(to_sql(i) for i in node.items)})"


@to_sql.register
def _(node: ast.InSelect) -> str:
    kw = "NOT IN" if node.negated else "IN"
    return f"{_operand(node.operand)} {kw} ({to_sql(node.query)})"


@to_sql.register
def _(node: ast.And) -> str:
    return f"{_bool_operand(node.left, ast.And)} AND {_bool_operand(node.right, ast.And, right=True)}"


@to_sql.register
def _(node: ast.Or) -> str:
    return f"{_bool_operand(node.left, ast.Or)} OR {_bool_operand(node.right, ast.Or, right=True)}"


def _bool_operand(expr, parent, right: bool = False) -> str:
    # left-nested chains of the same connective print without parentheses
    if isinstance(expr, (ast.And, ast.Or)) and (right or not isinstance(expr, parent)):
        return f"({to_sql(expr)})"
    return to_sql(expr)


@to_sql.register
def _(node: ast.Not) -> str:
    inner = node.operand
    if isinstance(inner, (ast.And, ast.Or)):
        return f"NOT ({to_sql(inner)})"
    return f"NOT {to_sql(inner)}"


@to_sql.register
def _(node: ast.Call) -> str:
    return f"{node.name}({', '.join(to_sql(a) for a in node.args)})"


def _source(side: str, spec: ast.SourceSpec) -> str:
    binds = [f"ID = {spec.id_col}"]
    if spec.from_col is not None:
        binds.append(f"FROM = {spec.from_col}")
        binds.append(f"TO = {spec.to_col}")
    binds.extend(f"{a} = {c}" for a, c in spec.attrs)
    text = f"{side} ({', '.join(binds)}) FROM {spec.table}"
    if spec.where is not None:
        text += f" WHERE {to_sql(spec.where)}"
    return text


def _hint(hint) -> str:
    return f" HINT(SHORTESTPATH({hint.attribute}))" if hint is not None else ""


@to_sql.register
def _(node: ast.TableRef) -> str:
    return node.name + (f" {node.alias}" if node.alias else "")


@to_sql.register
def _(node: ast.GraphRef) -> str:
    return f"{node.view}.{node.kind} {node.alias}{_hint(node.hint)}"


@to_sql.register
def _(node: ast.TempGraphRef) -> str:
    kind = "DIRECTED" if node.directed else "UNDIRECTED"
    return (
        f"TEMPGRAPH({kind} {_source('VERTEXES', node.vertexes)} "
        f"{_source('EDGES', node.edges)}).PATHS {node.alias}{_hint(node.hint)}"
    )


@to_sql.register
def _(node: ast.Select) -> str:
    parts = ["SELECT"]
    if node.top is not None:
        parts.append(f"TOP {node.top}")
    if node.items:
        parts.append(", ".join(
            to_sql(i.expr) + (f" AS {i.alias}" if i.alias else "") for i in node.items
        ))
    else:
        parts.append("*")
    parts.append("FROM " + ", ".join(to_sql(f) for f in node.from_items))
    if node.where is not None:
        parts.append("WHERE " + to_sql(node.where))
    if node.limit is not None:
        parts.append(f"LIMIT {node.limit}")
    return " ".join(parts)


@to_sql.register
def _(node: ast.Explain) -> str:
    return "EXPLAIN " + to_sql(node.query)


@to_sql.register
def _(node: ast.CreateTable) -> str:
    cols = ", ".join(f"{c.name} {c.type}" for c in node.columns)
    return f"CREATE TABLE {node.name} ({cols})"


@to_sql.register
def _(node: ast.CreateGraphView) -> str:
    d = node.definition
    kind = "DIRECTED" if d.directed else "UNDIRECTED"
    return (
        f"CREATE {kind} GRAPH VIEW {d.name} "
        f"{_source('VERTEXES', d.vertexes)} {_source('EDGES', d.edges)}"
    )


@to_sql.register
def _(node: ast.Insert) -> str:
    cols = f" ({', '.join(node.columns)})" if node.columns is not None else ""
    rows = ", ".join("(" + ", ".join(to_sql(v) for v in row) + ")" for row in node.rows)
    return f"INSERT INTO {node.table}{cols} VALUES {rows}"


@to_sql.register
def _(node: ast.Update) -> str:
    sets = ", ".join(f"{c} = {_operand(e)}" for c, e in node.assignments)
    text = f"UPDATE {node.table} SET {sets}"
    if node.where is not None:
        text += f" WHERE {to_sql(node.where)}"
    return text


@to_sql.register
def _(node: ast.Delete) -> str:
    text = f"DELETE FROM {node.table}"
    if node.where is not None:
        text += f" WHERE {to_sql(node.where)}"
    return text


@to_sql.register
def _(node: ast.MetaCommand) -> str:
    return " ".join(("." + node.name,) + node.args)
