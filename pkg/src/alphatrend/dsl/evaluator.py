"""Vectorized evaluation of alpha expressions over price panels.

Every arithmetic step maps non-finite intermediates (division by zero,
overflow, log of a non-positive number) to NaN, so "undefined" stays a
single consistent notion from raw data through kernel outputs.

Results are float64: shape (n_dates,) in a single-instrument context,
(n_dates, n_instruments) otherwise.  A scalar-shaped expression
broadcasts to a constant series/panel.
"""

from __future__ import annotations

import logging
import multiprocessing as mp
from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..panel import PricePanel, simple_returns
from .ast import Binary, Call, Conditional, Expr, FieldRef, Literal, Unary, walk
from .registry import adv_window
from .shapes import shape_check

log = logging.getLogger(__name__)


@dataclass
class EvalContext:
    """A panel plus lazily computed derived fields.

    ``use_adjusted_close`` redirects the close field (and everything
    derived from it: returns, vwap) to adjusted closes.
    """

    panel: PricePanel
    use_adjusted_close: bool = False
    _cache: dict = field(default_factory=dict, repr=False)

    def field_values(self, name: str) -> np.ndarray:
        if name in self._cache:
            return self._cache[name]
        vals = self.panel.values
        close_key = "adj_close" if self.use_adjusted_close else "close"
        if name in ("open", "high", "low", "volume", "adj_close"):
            out = vals[name]
        elif name == "close":
            out = vals[close_key]
        elif name == "returns":
            out = simple_returns(vals[close_key])
        elif name == "vwap":
            # volume-weighted price proxy from daily bars
            out = (vals["high"] + vals["low"] + vals[close_key]) / 3.0
        else:
            n = adv_window(name)
            if n is None:
                raise KeyError(name)
            out = kernels.ts_mean(vals["volume"], n)
        self._cache[name] = out
        return out

    def prewarm(self, exprs: list[Expr]) -> None:
        """Materialize every field the expressions mention (fork-friendly)."""
        for e in exprs:
            for node in walk(e):
                if isinstance(node, FieldRef):
                    self.field_values(node.name)


def _clean(out) -> np.ndarray:
    # NaN already propagates through arithmetic; only infinities
    # (division by zero, overflow) need remapping to undefined.
    out = np.asarray(out, dtype=np.float64)
    bad = np.isinf(out)
    if bad.any():
        out = np.where(bad, np.nan, out)
    return out


def _window(e: Expr) -> int:
    assert isinstance(e, Literal)
    return int(e.value)


_ARITH = {"+", "-", "*", "/", "^"}
_CMP = {"<", ">", "<=", ">=", "==", "!="}


def _binary(op: str, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        if op == "+":
            return _clean(a + b)
        if op == "-":
            return _clean(a - b)
        if op == "*":
            return _clean(a * b)
        if op == "/":
            return _clean(a / b)
        if op == "^":
            return _clean(np.power(a, b))
        nanmask = np.isnan(a) | np.isnan(b)
        if op == "<":
            raw = a < b
        elif op == ">":
            raw = a > b
        elif op == "<=":
            raw = a <= b
        elif op == ">=":
            raw = a >= b
        elif op == "==":
            raw = a == b
        elif op == "!=":
            raw = a != b
        elif op == "&&":
            raw = (a != 0) & (b != 0)
        elif op == "||":
            raw = (a != 0) | (b != 0)
        else:
            raise ValueError(f"unknown operator {op!r}")
        return np.where(nanmask, np.nan, raw.astype(np.float64))


def _visit(e: Expr, ctx: EvalContext) -> np.ndarray:
    if isinstance(e, Literal):
        return np.float64(e.value)
    if isinstance(e, FieldRef):
        return ctx.field_values(e.name)
    if isinstance(e, Unary):
        return -_visit(e.operand, ctx)
    if isinstance(e, Binary):
        return _binary(e.op, _visit(e.left, ctx), _visit(e.right, ctx))
    if isinstance(e, Conditional):
        c = _visit(e.cond, ctx)
        a = _visit(e.if_true, ctx)
        b = _visit(e.if_false, ctx)
        raw = np.where(c != 0, a, b)
        return np.where(np.isnan(c), np.nan, raw)
    if isinstance(e, Call):
        f = e.func
        if f in ("delay", "delta"):
            x = _visit(e.args[0], ctx)
            op = kernels.delay if f == "delay" else kernels.delta
            return op(x, _window(e.args[1]))
        if f in kernels.TS_UNARY or f == "sum":
            kern = kernels.TS_UNARY.get(f, kernels.ts_sum)
            return kern(_visit(e.args[0], ctx), _window(e.args[1]))
        if f in ("correlation", "covariance"):
            x = _visit(e.args[0], ctx)
            y = _visit(e.args[1], ctx)
            kern = kernels.correlation if f == "correlation" else kernels.covariance
            return kern(x, y, _window(e.args[2]))
        if f == "rank":
            # rank(field) recurs across catalog entries; memoize those
            arg = e.args[0]
            if isinstance(arg, FieldRef):
                key = ("rank", arg.name)
                if key not in ctx._cache:
                    ctx._cache[key] = kernels.cs_rank(_visit(arg, ctx))
                return ctx._cache[key]
            return kernels.cs_rank(_visit(arg, ctx))
        if f == "scale":
            a = float(e.args[1].value) if len(e.args) == 2 else 1.0
            return kernels.scale(_visit(e.args[0], ctx), a)
        if f == "signedpower":
            return kernels.signedpower(_visit(e.args[0], ctx), _visit(e.args[1], ctx))
        if f == "log":
            with np.errstate(invalid="ignore", divide="ignore"):
                return _clean(np.log(_visit(e.args[0], ctx)))
        if f == "abs":
            return np.abs(_visit(e.args[0], ctx))
        if f == "sign":
            return np.sign(_visit(e.args[0], ctx))
        if f == "min":
            return np.minimum(_visit(e.args[0], ctx), _visit(e.args[1], ctx))
        if f == "max":
            return np.maximum(_visit(e.args[0], ctx), _visit(e.args[1], ctx))
        raise ValueError(f"unbound function {f!r}")
    raise TypeError(f"not an expression node: {e!r}")


def evaluate(
    expr: Expr,
    panel: PricePanel,
    *,
    use_adjusted_close: bool = False,
    context: EvalContext | None = None,
) -> np.ndarray:
    """Evaluate one shape-checked expression against a panel."""
    shape_check(expr, panel.n_instruments)
    ctx = context if context is not None else EvalContext(panel, use_adjusted_close)
    res = _visit(expr, ctx)
    n, k = panel.n_dates, panel.n_instruments
    res = np.asarray(res, dtype=np.float64)
    if res.ndim == 0:
        res = np.full((n, k), float(res))
    return res[:, 0] if k == 1 else res


def reduce_panel(values: np.ndarray, how: str = "mean") -> np.ndarray:
    """Collapse a panel result to a series across instruments.

    Rows with no defined value stay NaN (suppressing the all-NaN
    warnings nanmean would emit).
    """
    if values.ndim == 1:
        return values
    any_def = np.isfinite(values).any(axis=1)
    out = np.full(values.shape[0], np.nan)
    if how == "mean":
        out[any_def] = np.nanmean(values[any_def], axis=1)
    elif how == "median":
        out[any_def] = np.nanmedian(values[any_def], axis=1)
    else:
        raise ValueError(f"unknown reduction {how!r}")
    return out


# Fork-shared state for evaluate_many.  Set in the parent right before
# the pool starts so workers inherit it by copy-on-write.
_SHARED: dict = {}


def _eval_task(i: int):
    exprs = _SHARED["exprs"]
    ctx = _SHARED["ctx"]
    reduce_how = _SHARED["reduce"]
    out = evaluate(exprs[i], ctx.panel, context=ctx)
    if reduce_how is not None:
        out = reduce_panel(out, reduce_how)
    return out


def evaluate_many(
    exprs: list[Expr],
    panel: PricePanel,
    *,
    jobs: int = 1,
    reduce: str | None = None,
    use_adjusted_close: bool = False,
) -> list[np.ndarray]:
    """Evaluate a batch of expressions, optionally across processes.

    Results are ordered like the input and are bit-identical for any
    job count: each expression is evaluated independently with the same
    arithmetic either way.  ``reduce`` collapses panel-shaped results
    to series ("mean" or "median").
    """
    for e in exprs:
        shape_check(e, panel.n_instruments)
    ctx = EvalContext(panel, use_adjusted_close)
    if jobs > 1:
        try:
            mp_ctx = mp.get_context("fork")
        except ValueError:
            log.warning("fork start method unavailable; running sequentially")
            jobs = 1
    if jobs <= 1:
        out = []
        for e in exprs:
            r = evaluate(e, panel, context=ctx)
            out.append(reduce_panel(r, reduce) if reduce is not None else r)
        return out

    ctx.prewarm(exprs)
    _SHARED["exprs"] = exprs
    _SHARED["ctx"] = ctx
    _SHARED["reduce"] = reduce
    try:
        with mp_ctx.Pool(processes=jobs) as pool:
            return pool.map(_eval_task, range(len(exprs)))
    finally:
        _SHARED.clear()
