"""Static shape analysis for alpha expressions.

Every expression has one of three shapes: SCALAR (a number), SERIES
(one value per date) or PANEL (one value per date per instrument).
Checking happens before any data is touched, so a catalog full of
expressions can be validated against a context cheaply.
"""

from __future__ import annotations

import enum

from ..errors import ShapeError
from .ast import Binary, Call, Conditional, Expr, FieldRef, Literal, Unary
from .registry import BASE_FIELDS, FUNCTIONS, adv_window


class Shape(enum.Enum):
    SCALAR = "scalar"
    SERIES = "series"
    PANEL = "panel"


def _combine(a: Shape, b: Shape, what: str) -> Shape:
    if a == b:
        return a
    if a == Shape.SCALAR:
        return b
    if b == Shape.SCALAR:
        return a
    raise ShapeError(f"{what} mixes {a.value} and {b.value} operands")


def _require_window_literal(e: Expr, func: str, min_window: int) -> int:
    if not isinstance(e, Literal) or e.value != int(e.value):
        raise ShapeError(f"{func}: window argument must be an integer literal")
    w = int(e.value)
    if w < min_window:
        raise ShapeError(f"{func}: window must be >= {min_window}, got {w}")
    return w


def shape_check(expr: Expr, n_instruments: int = 1) -> Shape:
    """Infer the expression's shape, rejecting ill-formed trees.

    Raises ShapeError for unknown identifiers, bad window arguments,
    cross-sectional ops in a single-instrument context, and operand
    shape mismatches.
    """
    field_shape = Shape.PANEL if n_instruments > 1 else Shape.SERIES

    def visit(e: Expr) -> Shape:
        if isinstance(e, Literal):
            return Shape.SCALAR
        if isinstance(e, FieldRef):
            if e.name in BASE_FIELDS or adv_window(e.name) is not None:
                return field_shape
            raise ShapeError(f"unknown identifier {e.name!r}")
        if isinstance(e, Unary):
            return visit(e.operand)
        if isinstance(e, Binary):
            return _combine(visit(e.left), visit(e.right), f"operator {e.op!r}")
        if isinstance(e, Conditional):
            shape = _combine(visit(e.cond), visit(e.if_true), "conditional")
            return _combine(shape, visit(e.if_false), "conditional")
        if isinstance(e, Call):
            sig = FUNCTIONS.get(e.func)
            if sig is None:
                raise ShapeError(f"unknown function {e.func!r}")
            if sig.window_arg is not None:
                _require_window_literal(e.args[sig.window_arg], e.func, sig.min_window)
            if sig.kind in ("ts", "pair_ts"):
                data_args = e.args[:1] if sig.kind == "ts" else e.args[:2]
                shapes = [visit(a) for a in data_args]
                out = shapes[0]
                for s in shapes[1:]:
                    out = _combine(out, s, e.func)
                if out == Shape.SCALAR:
                    raise ShapeError(f"{e.func} needs a series or panel argument")
                return out
            if sig.kind == "cs":
                inner = visit(e.args[0])
                if inner != Shape.PANEL:
                    raise ShapeError(
                        f"{e.func} is cross-sectional and needs a multi-instrument panel"
                    )
                return Shape.PANEL
            if sig.kind == "scale":
                if len(e.args) == 2:
                    a = e.args[1]
                    if not isinstance(a, Literal) or not a.value > 0:
                        raise ShapeError("scale: second argument must be a positive literal")
                inner = visit(e.args[0])
                if inner == Shape.SCALAR:
                    raise ShapeError("scale needs a series or panel argument")
                return inner
            if sig.kind == "signedpower":
                base = visit(e.args[0])
                p = visit(e.args[1])
                if p != Shape.SCALAR:
                    raise ShapeError("signedpower: exponent must be scalar-shaped")
                return base
            if sig.kind == "elem1":
                return visit(e.args[0])
            if sig.kind == "elem2":
                return _combine(visit(e.args[0]), visit(e.args[1]), e.func)
            raise ShapeError(f"unhandled function kind {sig.kind!r}")
        raise ShapeError(f"not an expression node: {e!r}")

    return visit(expr)
