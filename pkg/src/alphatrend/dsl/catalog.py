"""Named alpha catalogs.

A catalog file is UTF-8 text, one ``name := expression`` per line.
Blank lines are skipped and ``#`` starts a comment (whole-line or
trailing).  Names must be unique identifiers.
"""

from __future__ import annotations

import re
from importlib import resources
from pathlib import Path

from ..errors import CatalogError, ExprSyntaxError
from .ast import Expr
from .parser import parse

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z_0-9]*$")

DEFAULT_CATALOG_RESOURCE = "default_alphas.txt"


def parse_catalog(text: str) -> list[tuple[str, Expr]]:
    """Parse catalog text into ordered (name, expression) pairs."""
    entries: list[tuple[str, Expr]] = []
    seen: set[str] = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":=" not in line:
            raise CatalogError(line_no, "expected 'name := expression'")
        name, _, body = line.partition(":=")
        name = name.strip()
        body = body.strip()
        if not _NAME_RE.match(name):
            raise CatalogError(line_no, f"bad name {name!r}")
        if name in seen:
            raise CatalogError(line_no, f"duplicate name {name!r}")
        if not body:
            raise CatalogError(line_no, "empty expression")
        try:
            expr = parse(body)
        except ExprSyntaxError as exc:
            raise CatalogError(line_no, f"{name}: {exc}") from exc
        seen.add(name)
        entries.append((name, expr))
    return entries


def load_catalog(path) -> list[tuple[str, Expr]]:
    return parse_catalog(Path(path).read_text(encoding="utf-8"))


def load_default_catalog() -> list[tuple[str, Expr]]:
    """The catalog shipped with the package."""
    text = (
        resources.files("alphatrend")
        .joinpath("catalogs", DEFAULT_CATALOG_RESOURCE)
        .read_text(encoding="utf-8")
    )
    return parse_catalog(text)
