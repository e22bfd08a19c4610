"""Tokenizer for the SQL dialect."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ParseError

IDENT = "ident"
NUMBER = "number"
STRING = "string"
OP = "op"
EOF = "eof"

# longest operators first so "<=" wins over "<"
_OPERATORS = ("..", "<=", ">=", "<>", "!=", "=", "<", ">", "(", ")", "[", "]", ",", ".", ";", "*", "-", "+")


@dataclass(frozen=True)
class Token:
    kind: str
    value: object
    line: int
    column: int
    text: str

    def is_kw(self, *words: str) -> bool:
        return self.kind == IDENT and self.value.upper() in words

    def is_op(self, *ops: str) -> bool:
        return self.kind == OP and self.value in ops


def tokenize(text: str, line: int = 1) -> list[Token]:
    tokens: list[Token] = []
    i, n = 0, len(text)
    line_start = 0
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            i += 1
            line_start = i
            continue
        if ch.isspace():
            i += 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        start, start_col, start_line = i, i - line_start + 1, line
        if ch.isalpha() or ch == "_":
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            word = text[start:i]
            tokens.append(Token(IDENT, word, line, start_col, word))
        elif ch.isdigit():
            while i < n and text[i].isdigit():
                i += 1
            is_float = False
            # "0..5" is a range, not the float "0."
            if i + 1 < n and text[i] == "." and text[i + 1].isdigit():
                is_float = True
                i += 1
                while i < n and text[i].isdigit():
                    i += 1
            if i < n and text[i] in "eE":
                j = i + 1
                if j < n and text[j] in "+-":
                    j += 1
                if j < n and text[j].isdigit():
                    is_float = True
                    i = j
                    while i < n and text[i].isdigit():
                        i += 1
            raw = text[start:i]
            tokens.append(Token(NUMBER, float(raw) if is_float else int(raw), line, start_col, raw))
        elif ch in "'\"":
            quote = ch
            i += 1
            buf = []
            while True:
                if i >= n:
                    raise ParseError("unterminated string literal", line, start_col, text[start:start + 10])
                c = text[i]
                if c == quote:
                    if i + 1 < n and text[i + 1] == quote:
                        buf.append(quote)
                        i += 2
                        continue
                    i += 1
                    break
                if c == "\n":
                    line += 1
                    line_start = i + 1
                buf.append(c)
                i += 1
            raw = text[start:i]
            tokens.append(Token(STRING, "".join(buf), start_line, start_col, raw))
        else:
            for op in _OPERATORS:
                if text.startswith(op, i):
                    i += len(op)
                    tokens.append(Token(OP, "<>" if op == "!=" else op, line, start_col, op))
                    break
            else:
                raise ParseError(f"unexpected character {ch!r}", line, start_col, ch)
    tokens.append(Token(EOF, None, line, i - line_start + 1, "<end of input>"))
    return tokens
