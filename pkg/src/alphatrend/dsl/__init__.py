"""Alpha expression language: lexer, parser, shapes, evaluator, catalogs."""

from .ast import Binary, Call, Conditional, Expr, FieldRef, Literal, Unary, pretty
from .catalog import load_catalog, load_default_catalog, parse_catalog
from .evaluator import EvalContext, evaluate, evaluate_many
from .parser import parse
from .shapes import Shape, shape_check
from .tokens import Token, tokenize

__all__ = [
    "Binary",
    "Call",
    "Conditional",
    "EvalContext",
    "Expr",
    "FieldRef",
    "Literal",
    "Shape",
    "Token",
    "Unary",
    "evaluate",
    "evaluate_many",
    "load_catalog",
    "load_default_catalog",
    "parse",
    "parse_catalog",
    "pretty",
    "shape_check",
    "tokenize",
]
