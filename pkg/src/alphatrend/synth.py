"""Synthetic OHLCV universes with a planted, learnable trend signal.

Prices follow a two-regime drift process: a hidden up/down state that
persists for long stretches, plus Gaussian noise. Recent returns then
carry real information about the next day's direction, so a correctly
wired pipeline scores clearly above chance on this data while a broken
one does not. Used by the test suite and handy for demo runs.
"""

from __future__ import annotations

import numpy as np

from .panel import FIELDS, PricePanel


def _weekdays(start: str, n: int) -> np.ndarray:
    first = np.datetime64(start, "D")
    # generous range, then keep the first n business days
    span = np.arange(first, first + np.timedelta64(2 * n + 10, "D"))
    days = span[np.is_busday(span)]
    return days[:n].copy()


def _bars_from_returns(rng, log_returns: np.ndarray, base: float):
    """Consistent OHLCV columns from a log-return path."""
    n = len(log_returns)
    close = base * np.exp(np.cumsum(log_returns))
    prev = np.r_[base, close[:-1]]
    open_ = prev * np.exp(rng.normal(0.0, 0.002, n))
    hi_pad = np.abs(rng.normal(0.0, 0.004, n))
    lo_pad = np.abs(rng.normal(0.0, 0.004, n))
    high = np.maximum(open_, close) * np.exp(hi_pad)
    low = np.minimum(open_, close) * np.exp(-lo_pad)
    volume = np.round(rng.lognormal(13.0, 0.4, n))
    # a slowly decaying payout adjustment, equal to close on the last day
    adj = close * np.exp(-1e-4 * np.arange(n - 1, -1, -1))
    return {
        "open": open_,
        "high": high,
        "low": low,
        "close": close,
        "adj_close": adj,
        "volume": volume,
    }


def regime_states(rng, n: int, persistence: float = 0.98) -> np.ndarray:
    """A +-1 state path that flips with probability 1 - persistence."""
    flips = rng.uniform(size=n) > persistence
    signs = np.where(flips, -1.0, 1.0)
    signs[0] = 1.0
    return np.cumprod(signs)


def make_universe(
    n_days: int = 700,
    n_constituents: int = 6,
    seed: int = 0,
    start: str = "2013-11-01",
    trend_strength: float = 0.004,
    noise: float = 0.01,
    persistence: float = 0.98,
) -> tuple[PricePanel, PricePanel | None]:
    """An index panel and, optionally, a constituent panel on the same dates.

    Constituents load 0.8 on the index's regime-driven return and add
    idiosyncratic noise, so cross-sectional averages of their features
    still see the planted signal.
    """
    if n_days < 2:
        raise ValueError("n_days must be >= 2")
    rng = np.random.default_rng(seed)
    dates = _weekdays(start, n_days)
    state = regime_states(rng, n_days, persistence)
    common = trend_strength * state + rng.normal(0.0, noise, n_days)
    index_cols = _bars_from_returns(rng, common, base=1800.0)
    index = PricePanel(
        dates=dates,
        tickers=("INDEX",),
        values={f: index_cols[f][:, None] for f in FIELDS},
    )
    if n_constituents < 1:
        return index, None
    cols = {f: np.empty((n_days, n_constituents)) for f in FIELDS}
    for i in range(n_constituents):
        own = 0.8 * common + rng.normal(0.0, 0.6 * noise, n_days)
        bars = _bars_from_returns(rng, own, base=20.0 * (i + 1))
        for f in FIELDS:
            cols[f][:, i] = bars[f]
    members = PricePanel(
        dates=dates,
        tickers=tuple(f"C{i:02d}" for i in range(n_constituents)),
        values=cols,
    )
    return index, members
