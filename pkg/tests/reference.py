"""Independent brute-force oracles for the test suite.

Everything here is written the slow, obvious way (python loops over
window slices) and shares no code with the package's vectorized
kernels. Kernel tests compare the two implementations; if they ever
agree by construction the tests are worthless, so keep this module
free of imports from alphatrend.kernels.
"""

from __future__ import annotations

import math

import numpy as np

NAN = float("nan")


def _window(x, t, w):
    """Raw window values ending at t (inclusive), shorter near the head."""
    lo = max(0, t - w + 1)
    return x[lo : t + 1]


def _defined(vals):
    return [v for v in vals if math.isfinite(v)]


def o_ts_sum(x, w, min_valid=None):
    mv = w if min_valid is None else min_valid
    out = []
    for t in range(len(x)):
        d = _defined(_window(x, t, w))
        out.append(sum(d) if len(d) >= mv else NAN)
    return np.array(out)


def o_ts_mean(x, w, min_valid=None):
    mv = w if min_valid is None else min_valid
    out = []
    for t in range(len(x)):
        d = _defined(_window(x, t, w))
        out.append(sum(d) / len(d) if len(d) >= mv else NAN)
    return np.array(out)


def o_ts_stddev(x, w, min_valid=None):
    mv = max(2, w if min_valid is None else min_valid)
    out = []
    for t in range(len(x)):
        d = _defined(_window(x, t, w))
        if len(d) < mv:
            out.append(NAN)
            continue
        if len(set(d)) == 1:
            out.append(0.0)  # constant window: exactly zero spread
            continue
        m = sum(d) / len(d)
        var = sum((v - m) ** 2 for v in d) / (len(d) - 1)
        out.append(math.sqrt(var))
    return np.array(out)


def o_ts_min(x, w, min_valid=None):
    mv = w if min_valid is None else min_valid
    out = []
    for t in range(len(x)):
        d = _defined(_window(x, t, w))
        out.append(min(d) if len(d) >= mv else NAN)
    return np.array(out)


def o_ts_max(x, w, min_valid=None):
    mv = w if min_valid is None else min_valid
    out = []
    for t in range(len(x)):
        d = _defined(_window(x, t, w))
        out.append(max(d) if len(d) >= mv else NAN)
    return np.array(out)


def _argext(x, w, min_valid, better):
    mv = w if min_valid is None else min_valid
    out = []
    for t in range(len(x)):
        vals = _window(x, t, w)
        m = len(vals)
        if len(_defined(vals)) < mv:
            out.append(NAN)
            continue
        best_p = None
        for p in range(m):  # oldest first, ties keep the oldest
            if not math.isfinite(vals[p]):
                continue
            if best_p is None or better(vals[p], vals[best_p]):
                best_p = p
        out.append(float(m - best_p))  # offset: most recent = 1
    return np.array(out)


def o_ts_argmax(x, w, min_valid=None):
    return _argext(x, w, min_valid, lambda a, b: a > b)


def o_ts_argmin(x, w, min_valid=None):
    return _argext(x, w, min_valid, lambda a, b: a < b)


def o_ts_rank(x, w, min_valid=None):
    mv = max(2, w if min_valid is None else min_valid)
    out = []
    for t in range(len(x)):
        vals = _window(x, t, w)
        cur = vals[-1]
        d = _defined(vals)
        if len(d) < mv or not math.isfinite(cur):
            out.append(NAN)
            continue
        less = sum(1 for v in d if v < cur)
        eq = sum(1 for v in d if v == cur)
        avg_rank = less + (eq + 1) / 2  # average of tied rank positions
        out.append((avg_rank - 1) / (len(d) - 1))
    return np.array(out)


def o_delay(x, d):
    out = [NAN] * len(x)
    for t in range(d, len(x)):
        out[t] = x[t - d]
    return np.array(out)


def o_delta(x, d):
    out = [NAN] * len(x)
    for t in range(d, len(x)):
        out[t] = x[t] - x[t - d]
    return np.array(out)


def o_covariance(x, y, w, min_valid=None):
    mv = max(2, w if min_valid is None else min_valid)
    out = []
    for t in range(len(x)):
        xs = _window(x, t, w)
        ys = _window(y, t, w)
        pairs = [(a, b) for a, b in zip(xs, ys) if math.isfinite(a) and math.isfinite(b)]
        if len(pairs) < mv:
            out.append(NAN)
            continue
        if len({a for a, _ in pairs}) == 1 or len({b for _, b in pairs}) == 1:
            out.append(0.0)  # a constant side makes the covariance exactly zero
            continue
        mx = sum(a for a, _ in pairs) / len(pairs)
        my = sum(b for _, b in pairs) / len(pairs)
        cov = sum((a - mx) * (b - my) for a, b in pairs) / (len(pairs) - 1)
        out.append(cov)
    return np.array(out)


def o_correlation(x, y, w, min_valid=None):
    mv = max(2, w if min_valid is None else min_valid)
    out = []
    for t in range(len(x)):
        xs = _window(x, t, w)
        ys = _window(y, t, w)
        pairs = [(a, b) for a, b in zip(xs, ys) if math.isfinite(a) and math.isfinite(b)]
        if len(pairs) < mv:
            out.append(NAN)
            continue
        if len({a for a, _ in pairs}) == 1 or len({b for _, b in pairs}) == 1:
            out.append(NAN)  # zero variance: correlation undefined
            continue
        if len(pairs) == 2:
            d = (pairs[1][0] - pairs[0][0]) * (pairs[1][1] - pairs[0][1])
            out.append(math.copysign(1.0, d))  # two points: exactly collinear
            continue
        mx = sum(a for a, _ in pairs) / len(pairs)
        my = sum(b for _, b in pairs) / len(pairs)
        vx = sum((a - mx) ** 2 for a, _ in pairs)
        vy = sum((b - my) ** 2 for _, b in pairs)
        if vx <= 0 or vy <= 0:
            out.append(NAN)
            continue
        cov = sum((a - mx) * (b - my) for a, b in pairs)
        out.append(cov / math.sqrt(vx * vy))
    return np.array(out)


def o_decay_linear(x, w, min_valid=None):
    mv = w if min_valid is None else min_valid
    out = []
    for t in range(len(x)):
        vals = _window(x, t, w)
        m = len(vals)
        num = 0.0
        den = 0.0
        cnt = 0
        for p, v in enumerate(vals):  # oldest gets the smallest weight
            weight = float(w - (m - 1 - p))
            if math.isfinite(v):
                num += weight * v
                den += weight
                cnt += 1
        out.append(num / den if cnt >= mv else NAN)
    return np.array(out)


def o_ts_product(x, w, min_valid=None):
    mv = w if min_valid is None else min_valid
    out = []
    for t in range(len(x)):
        d = _defined(_window(x, t, w))
        if len(d) < mv:
            out.append(NAN)
            continue
        prod = 1.0
        for v in d:
            prod *= v
        out.append(prod)
    return np.array(out)


def o_cs_rank(row):
    """Cross-sectional rank of one date row, averaged ties, in [0, 1]."""
    vals = np.asarray(row, dtype=float)
    out = np.full(len(vals), NAN)
    defined = [v for v in vals if math.isfinite(v)]
    k = len(defined)
    if k < 2:
        return out
    for i, v in enumerate(vals):
        if not math.isfinite(v):
            continue
        less = sum(1 for u in defined if u < v)
        eq = sum(1 for u in defined if u == v)
        avg_rank = less + (eq + 1) / 2
        out[i] = (avg_rank - 1) / (k - 1)
    return out


ORACLES = {
    "ts_sum": o_ts_sum,
    "ts_mean": o_ts_mean,
    "ts_stddev": o_ts_stddev,
    "ts_min": o_ts_min,
    "ts_max": o_ts_max,
    "ts_argmax": o_ts_argmax,
    "ts_argmin": o_ts_argmin,
    "ts_rank": o_ts_rank,
    "decay_linear": o_decay_linear,
    "product": o_ts_product,
}


# ------------------------------------------------------ scalar DSL oracle


def _clean1(v: float) -> float:
    return v if math.isfinite(v) else NAN


class ScalarRef:
    """Reference interpreter: one column at a time, loops everywhere.

    Uses the naive window oracles above; independent of the package's
    evaluator except for the AST node types.
    """

    def __init__(self, panel, use_adjusted_close=False):
        self.panel = panel
        self.n = panel.n_dates
        self.k = panel.n_instruments
        self.close_key = "adj_close" if use_adjusted_close else "close"

    def field(self, name: str) -> np.ndarray:
        p = self.panel
        if name == "close":
            return p.values[self.close_key].astype(float)
        if name in p.values:
            return p.values[name].astype(float)
        if name == "returns":
            c = p.values[self.close_key]
            out = np.full((self.n, self.k), NAN)
            for i in range(self.k):
                for t in range(1, self.n):
                    prev, cur = c[t - 1, i], c[t, i]
                    if math.isfinite(prev) and math.isfinite(cur) and prev != 0:
                        out[t, i] = cur / prev - 1.0
            return out
        if name == "vwap":
            h, l, c = p.values["high"], p.values["low"], p.values[self.close_key]
            return (h + l + c) / 3.0
        if name.startswith("adv"):
            w = int(name[3:])
            v = p.values["volume"]
            out = np.empty((self.n, self.k))
            for i in range(self.k):
                out[:, i] = o_ts_mean(v[:, i], w)
            return out
        raise KeyError(name)

    def eval(self, expr) -> np.ndarray:
        from alphatrend.dsl.ast import Binary, Call, Conditional, FieldRef, Literal, Unary

        n, k = self.n, self.k
        if isinstance(expr, Literal):
            return np.full((n, k), float(expr.value))
        if isinstance(expr, FieldRef):
            return self.field(expr.name)
        if isinstance(expr, Unary):
            return -self.eval(expr.operand)
        if isinstance(expr, Conditional):
            c = self.eval(expr.cond)
            a = self.eval(expr.if_true)
            b = self.eval(expr.if_false)
            out = np.empty((n, k))
            for t in range(n):
                for i in range(k):
                    cv = c[t, i]
                    if math.isnan(cv):
                        out[t, i] = NAN
                    else:
                        out[t, i] = a[t, i] if cv != 0 else b[t, i]
            return out
        if isinstance(expr, Binary):
            a = self.eval(expr.left)
            b = self.eval(expr.right)
            out = np.empty((n, k))
            for t in range(n):
                for i in range(k):
                    out[t, i] = self._binop(expr.op, a[t, i], b[t, i])
            return out
        if isinstance(expr, Call):
            return self._call(expr)
        raise TypeError(type(expr))

    @staticmethod
    def _binop(op: str, x: float, y: float) -> float:
        if math.isnan(x) or math.isnan(y):
            return NAN
        if op == "+":
            return _clean1(x + y)
        if op == "-":
            return _clean1(x - y)
        if op == "*":
            return _clean1(x * y)
        if op == "/":
            return _clean1(x / y) if y != 0 else NAN
        if op == "^":
            try:
                return _clean1(float(x**y))
            except (OverflowError, ValueError, ZeroDivisionError):
                return NAN
        if op == "<":
            return float(x < y)
        if op == "<=":
            return float(x <= y)
        if op == ">":
            return float(x > y)
        if op == ">=":
            return float(x >= y)
        if op == "==":
            return float(x == y)
        if op == "!=":
            return float(x != y)
        if op == "&&":
            return float(x != 0 and y != 0)
        if op == "||":
            return float(x != 0 or y != 0)
        raise ValueError(op)

    def _call(self, expr) -> np.ndarray:
        from alphatrend.dsl.ast import Literal

        name = expr.func
        n, k = self.n, self.k
        if name == "sum":
            name = "ts_sum"
        if name in ORACLES:
            x = self.eval(expr.args[0])
            w = int(expr.args[1].value)
            out = np.empty((n, k))
            for i in range(k):
                out[:, i] = ORACLES[name](x[:, i], w)
            return out
        if name in ("delay", "delta"):
            x = self.eval(expr.args[0])
            d = int(expr.args[1].value)
            fn = o_delay if name == "delay" else o_delta
            out = np.empty((n, k))
            for i in range(k):
                out[:, i] = fn(x[:, i], d)
            return out
        if name in ("correlation", "covariance"):
            x = self.eval(expr.args[0])
            y = self.eval(expr.args[1])
            w = int(expr.args[2].value)
            fn = o_correlation if name == "correlation" else o_covariance
            out = np.empty((n, k))
            for i in range(k):
                out[:, i] = fn(x[:, i], y[:, i], w)
            return out
        if name == "rank":
            x = self.eval(expr.args[0])
            out = np.empty((n, k))
            for t in range(n):
                out[t] = o_cs_rank(x[t])
            return out
        if name == "scale":
            x = self.eval(expr.args[0])
            a = float(expr.args[1].value) if len(expr.args) == 2 else 1.0
            out = np.full((n, k), NAN)
            for i in range(k):
                tot = sum(abs(v) for v in x[:, i] if math.isfinite(v))
                if tot > 0:
                    out[:, i] = x[:, i] * (a / tot)
            return out
        if name == "signedpower":
            x = self.eval(expr.args[0])
            p = self.eval(expr.args[1])
            out = np.empty((n, k))
            for t in range(n):
                for i in range(k):
                    v, e = x[t, i], p[t, i]
                    if math.isnan(v) or math.isnan(e):
                        out[t, i] = NAN
                        continue
                    sgn = 1.0 if v > 0 else (-1.0 if v < 0 else 0.0)
                    try:
                        mag = abs(v) ** e
                    except (OverflowError, ZeroDivisionError):
                        out[t, i] = NAN
                        continue
                    out[t, i] = _clean1(sgn * mag)
            return out
        if name == "log":
            x = self.eval(expr.args[0])
            out = np.empty((n, k))
            for t in range(n):
                for i in range(k):
                    v = x[t, i]
                    out[t, i] = math.log(v) if (math.isfinite(v) and v > 0) else NAN
            return out
        if name == "abs":
            return np.abs(self.eval(expr.args[0]))
        if name == "sign":
            x = self.eval(expr.args[0])
            return np.where(np.isnan(x), NAN, np.sign(x))
        if name == "min":
            a = self.eval(expr.args[0])
            b = self.eval(expr.args[1])
            return np.where(np.isnan(a) | np.isnan(b), NAN, np.minimum(a, b))
        if name == "max":
            a = self.eval(expr.args[0])
            b = self.eval(expr.args[1])
            return np.where(np.isnan(a) | np.isnan(b), NAN, np.maximum(a, b))
        raise ValueError(name)


def pairwise_auc(y_true, scores) -> float:
    """AUC as the positive-outranks-negative probability, ties half."""
    pos = [s for s, y in zip(scores, y_true) if y == 1]
    neg = [s for s, y in zip(scores, y_true) if y == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(pos) * len(neg))
