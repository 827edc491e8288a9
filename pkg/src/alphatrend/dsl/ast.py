"""Expression tree nodes and the precedence-aware pretty printer.

Nodes are frozen dataclasses, so structural equality and hashing come
for free and trees are acyclic by construction.
"""

from __future__ import annotations

from dataclasses import dataclass


class Expr:
    """Base class for expression nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Literal(Expr):
    value: float


@dataclass(frozen=True)
class FieldRef(Expr):
    """A market data field: open, close, returns, vwap, adv20, ..."""

    name: str


@dataclass(frozen=True)
class Unary(Expr):
    op: str
    operand: Expr


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Conditional(Expr):
    cond: Expr
    if_true: Expr
    if_false: Expr


@dataclass(frozen=True)
class Call(Expr):
    func: str
    args: tuple[Expr, ...]


# Precedence levels, loosest first.  Mirrors the parser's grammar.
_TERNARY, _OR, _AND, _CMP, _ADD, _MUL, _POW, _UNARY, _ATOM = range(1, 10)

_BINARY_LEVEL = {
    "||": _OR,
    "&&": _AND,
    "<": _CMP,
    ">": _CMP,
    "<=": _CMP,
    ">=": _CMP,
    "==": _CMP,
    "!=": _CMP,
    "+": _ADD,
    "-": _ADD,
    "*": _MUL,
    "/": _MUL,
    "^": _POW,
}


def _level(e: Expr) -> int:
    if isinstance(e, (Literal, FieldRef, Call)):
        return _ATOM
    if isinstance(e, Unary):
        return _UNARY
    if isinstance(e, Binary):
        return _BINARY_LEVEL[e.op]
    if isinstance(e, Conditional):
        return _TERNARY
    raise TypeError(f"not an expression node: {e!r}")


def _number(v: float) -> str:
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def _paren(text: str, need: bool) -> str:
    return f"({text})" if need else text


def pretty(e: Expr) -> str:
    """Render a tree with minimal parentheses.

    Parsing the output yields a structurally equal tree (literals with
    negative values excepted: they re-parse as negation of a positive
    literal, so builders should express negatives that way to start).
    """
    if isinstance(e, Literal):
        return _number(e.value)
    if isinstance(e, FieldRef):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({', '.join(pretty(a) for a in e.args)})"
    if isinstance(e, Unary):
        inner = _paren(pretty(e.operand), _level(e.operand) < _UNARY)
        return f"-{inner}"
    if isinstance(e, Binary):
        lv = _BINARY_LEVEL[e.op]
        if e.op == "^":
            # right-associative: (a^b)^c needs the parens, a^(b^c) does not
            left = _paren(pretty(e.left), _level(e.left) <= lv)
            right = _paren(pretty(e.right), _level(e.right) < lv)
        else:
            left = _paren(pretty(e.left), _level(e.left) < lv)
            right = _paren(pretty(e.right), _level(e.right) <= lv)
        return f"{left} {e.op} {right}"
    if isinstance(e, Conditional):
        cond = _paren(pretty(e.cond), _level(e.cond) <= _TERNARY)
        return f"{cond} ? {pretty(e.if_true)} : {pretty(e.if_false)}"
    raise TypeError(f"not an expression node: {e!r}")


def walk(e: Expr):
    """Yield every node in the tree, parents before children."""
    yield e
    if isinstance(e, Unary):
        yield from walk(e.operand)
    elif isinstance(e, Binary):
        yield from walk(e.left)
        yield from walk(e.right)
    elif isinstance(e, Conditional):
        yield from walk(e.cond)
        yield from walk(e.if_true)
        yield from walk(e.if_false)
    elif isinstance(e, Call):
        for a in e.args:
            yield from walk(a)
