"""Signatures of the built-in expression functions.

The parser uses arities, the shape checker uses kinds and window rules,
and the evaluator binds names to kernels.  Keeping one table means the
three can never disagree about what exists.
"""

from __future__ import annotations

from dataclasses import dataclass

# Kinds:
#   ts          time-series op: (series_or_panel, window)
#   pair_ts     (x, y, window)
#   cs          cross-sectional, panel only
#   elem1       elementwise unary
#   elem2       elementwise binary
#   scale       (x) or (x, a) with a a positive literal
#   signedpower (x, p) with p scalar-shaped


@dataclass(frozen=True)
class FuncSig:
    name: str
    arity: tuple[int, ...]
    kind: str
    window_arg: int | None = None
    min_window: int = 1


def _sig(name, arity, kind, window_arg=None, min_window=1):
    return FuncSig(name, arity, kind, window_arg, min_window)


FUNCTIONS: dict[str, FuncSig] = {
    s.name: s
    for s in [
        _sig("delay", (2,), "ts", window_arg=1),
        _sig("delta", (2,), "ts", window_arg=1),
        _sig("ts_sum", (2,), "ts", window_arg=1),
        _sig("sum", (2,), "ts", window_arg=1),
        _sig("ts_mean", (2,), "ts", window_arg=1),
        _sig("ts_stddev", (2,), "ts", window_arg=1, min_window=2),
        _sig("ts_min", (2,), "ts", window_arg=1),
        _sig("ts_max", (2,), "ts", window_arg=1),
        _sig("ts_argmax", (2,), "ts", window_arg=1),
        _sig("ts_argmin", (2,), "ts", window_arg=1),
        _sig("ts_rank", (2,), "ts", window_arg=1, min_window=2),
        _sig("product", (2,), "ts", window_arg=1),
        _sig("decay_linear", (2,), "ts", window_arg=1),
        _sig("correlation", (3,), "pair_ts", window_arg=2, min_window=2),
        _sig("covariance", (3,), "pair_ts", window_arg=2, min_window=2),
        _sig("rank", (1,), "cs"),
        _sig("scale", (1, 2), "scale"),
        _sig("signedpower", (2,), "signedpower"),
        _sig("log", (1,), "elem1"),
        _sig("abs", (1,), "elem1"),
        _sig("sign", (1,), "elem1"),
        _sig("min", (2,), "elem2"),
        _sig("max", (2,), "elem2"),
    ]
}

# Fields resolvable in every context.  advN (adv5, adv20, ...) is
# recognized by pattern: mean daily volume over the trailing N days.
BASE_FIELDS = ("open", "high", "low", "close", "adj_close", "volume", "returns", "vwap")


def adv_window(name: str) -> int | None:
    """The N of an advN field name, or None if the name is not one."""
    if name.startswith("adv") and len(name) > 3 and name[3:].isdigit():
        n = int(name[3:])
        if n >= 1:
            return n
    return None
