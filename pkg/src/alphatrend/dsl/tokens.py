"""Lexer for alpha expressions."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import ExprSyntaxError

# Longest operators first so "<=" beats "<".
_TOKEN_RE = re.compile(
    r"""
    (?P<WS>\s+)
  | (?P<NUMBER>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<IDENT>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<OP>\|\||&&|<=|>=|==|!=|[-+*/^<>?:])
  | (?P<LPAREN>\()
  | (?P<RPAREN>\))
  | (?P<COMMA>,)
    """,
    re.VERBOSE,
)

KINDS = ("NUMBER", "IDENT", "OP", "LPAREN", "RPAREN", "COMMA")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(source: str) -> list[Token]:
    """Split an expression into tokens.

    Whitespace separates tokens but produces none; joining the token
    texts back with the source's whitespace reproduces the source.
    An unrecognized character raises ExprSyntaxError with its offset.
    """
    out: list[Token] = []
    pos = 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "WS":
            out.append(Token(kind, m.group(), pos))
        pos = m.end()
    return out
