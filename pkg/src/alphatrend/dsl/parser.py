"""Recursive-descent parser for alpha expressions.

Precedence, loosest to tightest:

    ?:  then  ||  then  &&  then comparisons  then  + -  then  * /
    then ^ (right-associative)  then unary minus

so ``-1 * delta(close, 9)`` negates the literal, and ``close ^ 2 ^ 3``
is ``close ^ (2 ^ 3)``.
"""

from __future__ import annotations

from ..errors import ExprSyntaxError
from .ast import Binary, Call, Conditional, Expr, FieldRef, Literal, Unary
from .registry import FUNCTIONS
from .tokens import Token, tokenize

_CMP_OPS = ("<", ">", "<=", ">=", "==", "!=")


class _Parser:
    def __init__(self, tokens: list[Token], source: str):
        self.tokens = tokens
        self.source = source
        self.i = 0

    def _pos(self) -> int:
        if self.i < len(self.tokens):
            return self.tokens[self.i].pos
        return len(self.source)

    def peek(self) -> Token | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def at_op(self, *texts: str) -> bool:
        t = self.peek()
        return t is not None and t.kind == "OP" and t.text in texts

    def advance(self) -> Token:
        t = self.peek()
        if t is None:
            raise ExprSyntaxError("unexpected end of expression", self._pos())
        self.i += 1
        return t

    def expect(self, kind: str, text: str | None = None) -> Token:
        t = self.peek()
        if t is None or t.kind != kind or (text is not None and t.text != text):
            want = text or kind.lower()
            got = f"{t.text!r}" if t else "end of expression"
            raise ExprSyntaxError(f"expected {want!r}, found {got}", self._pos())
        self.i += 1
        return t

    # grammar, loosest binding first

    def ternary(self) -> Expr:
        cond = self.or_expr()
        if self.at_op("?"):
            self.advance()
            if_true = self.ternary()
            self.expect("OP", ":")
            if_false = self.ternary()
            return Conditional(cond, if_true, if_false)
        return cond

    def or_expr(self) -> Expr:
        node = self.and_expr()
        while self.at_op("||"):
            self.advance()
            node = Binary("||", node, self.and_expr())
        return node

    def and_expr(self) -> Expr:
        node = self.comparison()
        while self.at_op("&&"):
            self.advance()
            node = Binary("&&", node, self.comparison())
        return node

    def comparison(self) -> Expr:
        node = self.additive()
        while self.at_op(*_CMP_OPS):
            op = self.advance().text
            node = Binary(op, node, self.additive())
        return node

    def additive(self) -> Expr:
        node = self.multiplicative()
        while self.at_op("+", "-"):
            op = self.advance().text
            node = Binary(op, node, self.multiplicative())
        return node

    def multiplicative(self) -> Expr:
        node = self.power()
        while self.at_op("*", "/"):
            op = self.advance().text
            node = Binary(op, node, self.power())
        return node

    def power(self) -> Expr:
        base = self.unary()
        if self.at_op("^"):
            self.advance()
            return Binary("^", base, self.power())
        return base

    def unary(self) -> Expr:
        if self.at_op("-"):
            self.advance()
            return Unary("-", self.unary())
        return self.primary()

    def primary(self) -> Expr:
        t = self.peek()
        if t is None:
            raise ExprSyntaxError("unexpected end of expression", self._pos())
        if t.kind == "NUMBER":
            self.advance()
            return Literal(float(t.text))
        if t.kind == "LPAREN":
            self.advance()
            node = self.ternary()
            self.expect("RPAREN")
            return node
        if t.kind == "IDENT":
            self.advance()
            nxt = self.peek()
            if nxt is not None and nxt.kind == "LPAREN":
                return self.call(t)
            return FieldRef(t.text)
        raise ExprSyntaxError(f"unexpected token {t.text!r}", t.pos)

    def call(self, name_tok: Token) -> Expr:
        self.expect("LPAREN")
        args: list[Expr] = []
        if not (self.peek() is not None and self.peek().kind == "RPAREN"):
            args.append(self.ternary())
            while self.peek() is not None and self.peek().kind == "COMMA":
                self.advance()
                args.append(self.ternary())
        self.expect("RPAREN")
        sig = FUNCTIONS.get(name_tok.text)
        if sig is not None and len(args) not in sig.arity:
            want = " or ".join(str(a) for a in sig.arity)
            raise ExprSyntaxError(
                f"{name_tok.text} expects {want} argument(s), got {len(args)}",
                name_tok.pos,
            )
        return Call(name_tok.text, tuple(args))


def parse(source: str) -> Expr:
    """Parse one expression; trailing tokens are an error."""
    tokens = tokenize(source)
    p = _Parser(tokens, source)
    node = p.ternary()
    left = p.peek()
    if left is not None:
        raise ExprSyntaxError(f"unexpected token {left.text!r} after expression", left.pos)
    return node
