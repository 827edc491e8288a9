"""Rolling-window and cross-sectional kernels.

Arrays are float64 with time on axis 0; a second axis, when present,
indexes instruments.  NaN means undefined, and undefinedness is sticky:
any window with fewer than ``min_valid`` defined points yields NaN, as
does any arithmetic on NaN inputs.

Sum-like kernels (sum, mean, stddev, covariance, correlation) run on
prefix sums computed in 4096-row blocks: within a block values cumulate
sequentially, block bases accumulate by pairwise reduction, and each
column is pre-shifted by a representative value.  This keeps rounding
error bounded by roughly ``4096 * eps`` of the local scale no matter
how long the series grows, which comfortably meets a 1e-9 relative
tolerance against two-pass references.  Order-statistic kernels use a
monotone filter (min/max) or an explicit lag sweep (argmax, rank,
decay), so their results are exact.

Constancy is detected exactly rather than by thresholding: a window
whose defined points are all identical (per side, for the pairwise
kernels) reports a variance contribution of exactly zero, so constant
windows give a standard deviation of 0.0, a covariance of 0.0, and an
undefined correlation.  Two-point correlations are exactly +-1 by
construction and are reported as such.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d
from scipy.stats import rankdata

_BLOCK = 4096


@dataclass(frozen=True)
class WindowSpec:
    """A trailing window: ``length`` rows ending at the current row.

    ``min_valid`` is the number of defined points a window needs before
    the kernel reports a value; it defaults to ``length``, i.e. only
    complete windows count.
    """

    length: int
    min_valid: int | None = None

    def __post_init__(self):
        if self.length < 1:
            raise ValueError(f"window length must be >= 1, got {self.length}")
        if self.min_valid is not None and not (1 <= self.min_valid <= self.length):
            raise ValueError(
                f"min_valid must be in [1, {self.length}], got {self.min_valid}"
            )

    @property
    def required(self) -> int:
        return self.length if self.min_valid is None else self.min_valid


def _spec(window) -> WindowSpec:
    if isinstance(window, WindowSpec):
        return window
    return WindowSpec(int(window))


def _as2d(x: np.ndarray):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        return x[:, None], True
    if x.ndim != 2:
        raise ValueError(f"expected 1-D or 2-D input, got ndim={x.ndim}")
    return x, False


def _restore(x: np.ndarray, was_1d: bool) -> np.ndarray:
    return x[:, 0] if was_1d else x


def _warn_short(w: int, n: int) -> None:
    if w > n:
        warnings.warn(
            f"window length {w} exceeds series length {n}; result is all-undefined",
            stacklevel=3,
        )


def _column_shift(x: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """A per-column representative value used to center before summing."""
    head = x[:_BLOCK]
    head_mask = mask[:_BLOCK]
    cnt = head_mask.sum(axis=0)
    tot = np.where(head_mask, head, 0.0).sum(axis=0)
    with np.errstate(invalid="ignore"):
        c = np.where(cnt > 0, tot / np.maximum(cnt, 1), 0.0)
    return c


def _prefix(a: np.ndarray) -> np.ndarray:
    """P with P[0] = 0 and P[i] = a[:i].sum(axis=0), block-rebaselined."""
    n, k = a.shape
    out = np.empty((n + 1, k), dtype=np.float64)
    out[0] = 0.0
    base = np.zeros(k, dtype=np.float64)
    for s in range(0, n, _BLOCK):
        e = min(s + _BLOCK, n)
        np.cumsum(a[s:e], axis=0, out=out[s + 1 : e + 1])
        out[s + 1 : e + 1] += base
        base = base + a[s:e].sum(axis=0)
    return out


def _window_diff(prefix: np.ndarray, w: int) -> np.ndarray:
    """Trailing-window sums from a prefix array; head windows are clipped."""
    n = prefix.shape[0] - 1
    out = np.empty((n,) + prefix.shape[1:], dtype=np.float64)
    m = min(w, n)
    out[:m] = prefix[1 : m + 1]  # clipped heads start from P[0] = 0
    if n > m:
        np.subtract(prefix[w + 1 :], prefix[1 : n + 1 - w], out=out[m:])
    return out


def _count_ramp(n: int, w: int) -> np.ndarray:
    """Defined counts for clipped windows over fully defined data, (n, 1)."""
    return np.minimum(np.arange(1, n + 1, dtype=np.float64), float(w))[:, None]


# Below this window length a direct lag sweep beats building prefixes.
_SWEEP_MAX = 16


def _window_sum(y: np.ndarray, w: int) -> np.ndarray:
    """Trailing-window sums; sweeps lags for short windows."""
    if w <= _SWEEP_MAX:
        out = y.copy()
        for d in range(1, w):
            out[d:] += y[:-d]
        return out
    return _window_diff(_prefix(y), w)


def _moments(x2d: np.ndarray, w: int, want_sq: bool):
    """Window sums of (x - c), optionally (x - c)^2, plus defined counts."""
    mask = np.isfinite(x2d)
    clean = bool(mask.all())
    c = _column_shift(x2d, mask)
    y = (x2d - c) if clean else np.where(mask, x2d - c, 0.0)
    s1 = _window_sum(y, w)
    if clean:
        cnt = _count_ramp(x2d.shape[0], w)
    else:
        cnt = _window_sum(mask.astype(np.float64), w)
    s2 = _window_sum(y * y, w) if want_sq else None
    return s1, s2, cnt, c


def _invalidate(out: np.ndarray, cnt: np.ndarray, req: int) -> None:
    """NaN out rows/cells whose defined count is below the requirement."""
    bad = cnt < req
    if bad.shape[1] == 1 and out.shape[1] != 1:
        out[bad[:, 0]] = np.nan
    else:
        out[bad] = np.nan


def ts_sum(x, window) -> np.ndarray:
    """Trailing sum of the defined points in each window."""
    spec = _spec(window)
    x2d, flat = _as2d(x)
    _warn_short(spec.length, x2d.shape[0])
    s1, _, cnt, c = _moments(x2d, spec.length, want_sq=False)
    out = s1 + cnt * c
    _invalidate(out, cnt, spec.required)
    return _restore(out, flat)


def ts_mean(x, window) -> np.ndarray:
    """Trailing mean of the defined points in each window."""
    spec = _spec(window)
    x2d, flat = _as2d(x)
    _warn_short(spec.length, x2d.shape[0])
    s1, _, cnt, c = _moments(x2d, spec.length, want_sq=False)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = s1 / cnt + c
    _invalidate(out, cnt, spec.required)
    return _restore(out, flat)


def _window_const(x2d, mask, clean, w):
    """True where every defined value in the trailing window is identical.

    The test is exact: no arithmetic is performed on the values, only
    equality comparisons.  When defined values form a contiguous run per
    column (no NaN below a defined point, the usual warm-up layout) a
    change-count prefix sum answers it in one pass; columns with interior
    gaps fall back to rolling min == rolling max via order-statistic
    filters, where a change across a gap must not condemn windows that
    start inside the gap.
    """
    n = x2d.shape[0]
    if clean or not (mask[:-1] & ~mask[1:]).any():
        if clean:
            change = x2d[1:] != x2d[:-1]
        else:
            change = mask[1:] & mask[:-1] & (x2d[1:] != x2d[:-1])
        total = np.zeros((n,) + x2d.shape[1:], dtype=np.int64)
        np.cumsum(change, axis=0, out=total[1:])
        start = np.maximum(np.arange(n) - (w - 1), 0)
        return total == total[start]
    if clean:
        lo = hi = x2d
    else:
        lo = np.where(mask, x2d, np.inf)
        hi = np.where(mask, x2d, -np.inf)
    org = (w - 1) // 2
    wmin = minimum_filter1d(lo, size=w, axis=0, mode="constant", cval=np.inf, origin=org)
    wmax = maximum_filter1d(hi, size=w, axis=0, mode="constant", cval=-np.inf, origin=org)
    return wmin == wmax


def _var_num(s1, s2, cnt, const):
    """Centered second moment; exactly zero over constant windows."""
    with np.errstate(invalid="ignore", divide="ignore"):
        num = s2 - (s1 * s1) / cnt
    num = np.maximum(num, 0.0)
    num[const] = 0.0
    return num


def ts_stddev(x, window) -> np.ndarray:
    """Trailing sample standard deviation (ddof=1)."""
    spec = _spec(window)
    if spec.length < 2:
        raise ValueError("ts_stddev needs a window of at least 2")
    x2d, flat = _as2d(x)
    _warn_short(spec.length, x2d.shape[0])
    s1, s2, cnt, _ = _moments(x2d, spec.length, want_sq=True)
    mask = np.isfinite(x2d)
    const = _window_const(x2d, mask, bool(mask.all()), spec.length)
    num = _var_num(s1, s2, cnt, const)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.sqrt(num / (cnt - 1.0))
    _invalidate(out, cnt, max(spec.required, 2))
    return _restore(out, flat)


def _pair_moments(x2d, y2d, w):
    mask = np.isfinite(x2d) & np.isfinite(y2d)
    clean = bool(mask.all())
    cx = _column_shift(x2d, mask)
    cy = _column_shift(y2d, mask)
    if clean:
        ax = x2d - cx
        ay = y2d - cy
        cnt = _count_ramp(x2d.shape[0], w)
    else:
        ax = np.where(mask, x2d - cx, 0.0)
        ay = np.where(mask, y2d - cy, 0.0)
        cnt = _window_sum(mask.astype(np.float64), w)
    sx = _window_sum(ax, w)
    sy = _window_sum(ay, w)
    sxx = _window_sum(ax * ax, w)
    syy = _window_sum(ay * ay, w)
    sxy = _window_sum(ax * ay, w)
    cox = _window_const(x2d, mask, clean, w)
    coy = _window_const(y2d, mask, clean, w)
    return sx, sy, sxx, syy, sxy, cnt, cox, coy


def covariance(x, y, window) -> np.ndarray:
    """Trailing sample covariance (ddof=1) over jointly defined points."""
    spec = _spec(window)
    if spec.length < 2:
        raise ValueError("covariance needs a window of at least 2")
    x2d, fx = _as2d(x)
    y2d, fy = _as2d(y)
    if x2d.shape != y2d.shape:
        raise ValueError(f"shape mismatch {x2d.shape} vs {y2d.shape}")
    _warn_short(spec.length, x2d.shape[0])
    sx, sy, _, _, sxy, cnt, cox, coy = _pair_moments(x2d, y2d, spec.length)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = (sxy - sx * sy / cnt) / (cnt - 1.0)
    # a constant side makes the covariance exactly zero, not blocked-sum noise
    out[cox | coy] = 0.0
    _invalidate(out, cnt, max(spec.required, 2))
    return _restore(out, fx and fy)


def correlation(x, y, window) -> np.ndarray:
    """Trailing Pearson correlation; undefined when either side is constant."""
    spec = _spec(window)
    if spec.length < 2:
        raise ValueError("correlation needs a window of at least 2")
    x2d, fx = _as2d(x)
    y2d, fy = _as2d(y)
    if x2d.shape != y2d.shape:
        raise ValueError(f"shape mismatch {x2d.shape} vs {y2d.shape}")
    _warn_short(spec.length, x2d.shape[0])
    sx, sy, sxx, syy, sxy, cnt, cox, coy = _pair_moments(x2d, y2d, spec.length)
    vx = _var_num(sx, sxx, cnt, cox)
    vy = _var_num(sy, syy, cnt, coy)
    with np.errstate(invalid="ignore", divide="ignore"):
        cov_num = sxy - sx * sy / cnt
        out = cov_num / np.sqrt(vx * vy)
    # two non-constant points are exactly collinear, so snap to the exact
    # mathematical value instead of a ratio of rounded sums
    two = (cnt == 2) & (cov_num != 0.0)
    out[two] = np.sign(cov_num)[two]
    out[(vx <= 0.0) | (vy <= 0.0)] = np.nan
    _invalidate(out, cnt, max(spec.required, 2))
    return _restore(out, fx and fy)


def _extreme(x, window, minimum: bool) -> np.ndarray:
    spec = _spec(window)
    x2d, flat = _as2d(x)
    _warn_short(spec.length, x2d.shape[0])
    mask = np.isfinite(x2d)
    clean = bool(mask.all())
    fill = np.inf if minimum else -np.inf
    arr = x2d if clean else np.where(mask, x2d, fill)
    filt = minimum_filter1d if minimum else maximum_filter1d
    # origin (w-1)//2 turns the centered filter into a trailing window
    out = filt(
        arr,
        size=spec.length,
        axis=0,
        mode="constant",
        cval=fill,
        origin=(spec.length - 1) // 2,
    )
    if clean:
        cnt = _count_ramp(x2d.shape[0], spec.length)
    else:
        cnt = _window_sum(mask.astype(np.float64), spec.length)
        out[~np.isfinite(out)] = np.nan
    _invalidate(out, cnt, spec.required)
    return _restore(out, flat)


def ts_min(x, window) -> np.ndarray:
    """Trailing minimum of the defined points in each window."""
    return _extreme(x, window, minimum=True)


def ts_max(x, window) -> np.ndarray:
    """Trailing maximum of the defined points in each window."""
    return _extreme(x, window, minimum=False)


def _lagged(x2d: np.ndarray, d: int) -> np.ndarray:
    if d == 0:
        return x2d
    out = np.empty_like(x2d)
    out[:d] = np.nan
    out[d:] = x2d[:-d]
    return out


def delay(x, d: int) -> np.ndarray:
    """The value d rows back; the first d rows are undefined."""
    if d < 1:
        raise ValueError(f"delay lag must be >= 1, got {d}")
    x2d, flat = _as2d(x)
    return _restore(_lagged(x2d, d), flat)


def delta(x, d: int) -> np.ndarray:
    """x[t] - x[t-d]; undefined where either side is."""
    if d < 1:
        raise ValueError(f"delta lag must be >= 1, got {d}")
    x2d, flat = _as2d(x)
    return _restore(x2d - _lagged(x2d, d), flat)


def _argextreme(x, window, largest: bool) -> np.ndarray:
    spec = _spec(window)
    w = spec.length
    x2d, flat = _as2d(x)
    n = x2d.shape[0]
    _warn_short(w, n)
    mask = np.isfinite(x2d)
    clean = bool(mask.all())
    fill = -np.inf if largest else np.inf
    xf = x2d if clean else np.where(mask, x2d, fill)
    best = xf.copy()
    off = np.ones_like(x2d)
    # lag d supplies an older candidate; >= lets the oldest win ties
    for d in range(1, w):
        s = xf[:-d]
        b = best[d:]
        upd = (s >= b) if largest else (s <= b)
        np.copyto(b, s, where=upd)
        np.copyto(off[d:], float(d + 1), where=upd)
    if clean:
        cnt = _count_ramp(n, w)
    else:
        cnt = _window_sum(mask.astype(np.float64), w)
    off[np.isinf(best)] = np.nan
    _invalidate(off, cnt, spec.required)
    return _restore(off, flat)


def ts_argmax(x, window) -> np.ndarray:
    """1-based offset (most recent row = 1) of the window maximum.

    Ties resolve to the oldest occurrence, i.e. the largest offset.
    """
    return _argextreme(x, window, largest=True)


def ts_argmin(x, window) -> np.ndarray:
    """1-based offset of the window minimum; ties take the oldest."""
    return _argextreme(x, window, largest=False)


def ts_rank(x, window) -> np.ndarray:
    """Normalized rank of the current value within its trailing window.

    The average rank over defined points (ties averaged) is mapped to
    [0, 1] via (rank - 1) / (m - 1) where m is the defined count.
    """
    spec = _spec(window)
    w = spec.length
    if w < 2:
        raise ValueError("ts_rank needs a window of at least 2")
    x2d, flat = _as2d(x)
    n = x2d.shape[0]
    _warn_short(w, n)
    mask = np.isfinite(x2d)
    clean = bool(mask.all())
    less = np.zeros_like(x2d)
    eq = np.zeros_like(x2d)
    cnt = _count_ramp(n, w) if clean else mask.astype(np.float64)
    for d in range(1, w):
        s = x2d[:-d]
        cur = x2d[d:]
        less[d:] += s < cur
        eq[d:] += s == cur
        if not clean:
            cnt[d:] += mask[:-d]
    rank = less + (eq + 2.0) / 2.0
    with np.errstate(invalid="ignore", divide="ignore"):
        out = (rank - 1.0) / (cnt - 1.0)
    bad = cnt < max(spec.required, 2)
    if bad.shape[1] == 1 and out.shape[1] != 1:
        out[bad[:, 0]] = np.nan
    else:
        out[bad] = np.nan
    out[~mask] = np.nan
    return _restore(out, flat)


def decay_linear(x, window) -> np.ndarray:
    """Linearly weighted trailing mean; the newest point weighs most.

    Weights run w, w-1, ..., 1 from newest to oldest and renormalize
    over the defined points.
    """
    spec = _spec(window)
    w = spec.length
    x2d, flat = _as2d(x)
    n = x2d.shape[0]
    _warn_short(w, n)
    mask = np.isfinite(x2d)
    clean = bool(mask.all())
    num = np.zeros_like(x2d)
    if clean:
        num += x2d * float(w)
        for d in range(1, w):
            num[d:] += x2d[:-d] * float(w - d)
        # head windows are clipped, so their weight totals are partial
        den = np.empty(n, dtype=np.float64)
        t = np.arange(n, dtype=np.float64)
        full = w * (w + 1) / 2.0
        den[:] = full
        head = t < (w - 1)
        m = np.minimum(t, w - 1.0)
        den[head] = ((w + (w - m)) * (m + 1.0) / 2.0)[head]
        den2d = den[:, None]
        cnt = _count_ramp(n, w)
    else:
        den2d = np.zeros_like(x2d)
        cnt = np.zeros_like(x2d)
        xz = np.where(mask, x2d, 0.0)
        for d in range(w):
            weight = float(w - d)
            if d == 0:
                num += xz * weight
                den2d += mask * weight
                cnt += mask
            else:
                num[d:] += xz[:-d] * weight
                den2d[d:] += mask[:-d] * weight
                cnt[d:] += mask[:-d]
    with np.errstate(invalid="ignore", divide="ignore"):
        out = num / den2d
    _invalidate(out, cnt, spec.required)
    return _restore(out, flat)


def ts_product(x, window) -> np.ndarray:
    """Trailing product of the defined points in each window."""
    spec = _spec(window)
    w = spec.length
    x2d, flat = _as2d(x)
    n = x2d.shape[0]
    _warn_short(w, n)
    mask = np.isfinite(x2d)
    clean = bool(mask.all())
    xz = x2d if clean else np.where(mask, x2d, 1.0)
    prod = xz.copy()
    for d in range(1, w):
        prod[d:] *= xz[:-d]
    if clean:
        cnt = _count_ramp(n, w)
    else:
        cnt = mask.astype(np.float64)
        for d in range(1, w):
            cnt[d:] += mask[:-d]
    _invalidate(prod, cnt, spec.required)
    return _restore(prod, flat)


def cs_rank(x: np.ndarray) -> np.ndarray:
    """Cross-sectional fractional rank within each row.

    Defined values map to [0, 1] as (rank - 1) / (m - 1) with ties
    averaged; rows with fewer than two defined values are undefined.
    """
    x2d, flat = _as2d(x)
    if flat:
        raise ValueError("cs_rank needs a 2-D panel")
    mask = np.isfinite(x2d)
    cnt = mask.sum(axis=1, keepdims=True).astype(np.float64)
    filled = np.where(mask, x2d, np.inf)
    r = rankdata(filled, method="average", axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = (r - 1.0) / (cnt - 1.0)
    out[~mask] = np.nan
    out[np.broadcast_to(cnt < 2, out.shape)] = np.nan
    return out


def scale(x, a: float = 1.0) -> np.ndarray:
    """Rescale each column so its absolute values sum to ``a``."""
    if not (a > 0):
        raise ValueError(f"scale target must be positive, got {a}")
    x2d, flat = _as2d(x)
    tot = np.nansum(np.abs(x2d), axis=0)
    if np.any(tot == 0.0):
        warnings.warn("scale of an all-zero or all-undefined series", stacklevel=2)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = x2d * (a / tot)
    out[:, tot == 0.0] = np.nan
    return _restore(out, flat)


def signedpower(x, p) -> np.ndarray:
    """sign(x) * |x| ** p, elementwise."""
    x = np.asarray(x, dtype=np.float64)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        out = np.sign(x) * np.abs(x) ** p
    out = np.where(np.isfinite(out), out, np.nan)
    return out


TS_UNARY = {
    "ts_sum": ts_sum,
    "ts_mean": ts_mean,
    "ts_stddev": ts_stddev,
    "ts_min": ts_min,
    "ts_max": ts_max,
    "ts_argmax": ts_argmax,
    "ts_argmin": ts_argmin,
    "ts_rank": ts_rank,
    "product": ts_product,
    "decay_linear": decay_linear,
}

TS_MIN_WINDOW = {"ts_stddev": 2, "ts_rank": 2, "correlation": 2, "covariance": 2}
