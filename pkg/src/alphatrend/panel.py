"""Daily OHLCV bars and date-aligned price panels.

A :class:`PricePanel` holds one float64 matrix per field, with rows on a
strictly increasing date axis and one column per instrument.  Missing
observations are NaN.  All downstream feature computation consumes
panels, so validation happens once, here.
"""

from __future__ import annotations

import datetime as dt
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyPanelError, IntegrityError

FIELDS = ("open", "high", "low", "close", "adj_close", "volume")


@dataclass(frozen=True)
class OhlcvBar:
    """One day of trading for one instrument.

    Construction enforces the bar invariants: positive prices,
    low <= min(open, close), high >= max(open, close), volume >= 0.
    """

    date: dt.date
    open: float
    high: float
    low: float
    close: float
    adj_close: float
    volume: float

    def __post_init__(self):
        for name in ("open", "high", "low", "close", "adj_close"):
            v = getattr(self, name)
            if not (v > 0.0):
                raise IntegrityError(f"{self.date}: {name} must be positive, got {v}")
        if self.volume < 0:
            raise IntegrityError(f"{self.date}: volume must be non-negative, got {self.volume}")
        if self.low > min(self.open, self.close):
            raise IntegrityError(f"{self.date}: low {self.low} exceeds open/close")
        if self.high < max(self.open, self.close):
            raise IntegrityError(f"{self.date}: high {self.high} below open/close")


@dataclass
class PricePanel:
    """Date-aligned OHLCV arrays for one or more instruments.

    values maps each entry of FIELDS to a float64 array of shape
    (n_dates, n_instruments); NaN marks a missing observation.
    """

    dates: np.ndarray
    tickers: tuple[str, ...]
    values: dict[str, np.ndarray] = field(repr=False)

    def __post_init__(self):
        self.dates = np.asarray(self.dates, dtype="datetime64[D]")
        if self.dates.ndim != 1 or len(self.dates) == 0:
            raise EmptyPanelError("panel needs at least one date")
        if not np.all(self.dates[1:] > self.dates[:-1]):
            raise IntegrityError("panel dates must be strictly increasing")
        self.tickers = tuple(self.tickers)
        if len(self.tickers) == 0:
            raise EmptyPanelError("panel needs at least one instrument")
        if len(set(self.tickers)) != len(self.tickers):
            raise IntegrityError("duplicate ticker in panel")
        want = (len(self.dates), len(self.tickers))
        for name in FIELDS:
            if name not in self.values:
                raise IntegrityError(f"panel missing field {name!r}")
            arr = np.asarray(self.values[name], dtype=np.float64)
            if arr.shape != want:
                raise IntegrityError(
                    f"field {name!r} has shape {arr.shape}, expected {want}"
                )
            self.values[name] = arr

    @property
    def n_dates(self) -> int:
        return len(self.dates)

    @property
    def n_instruments(self) -> int:
        return len(self.tickers)

    def series(self, fld: str, ticker: str | None = None) -> np.ndarray:
        """One instrument's values for a field, as a 1-D copy."""
        col = 0 if ticker is None else self.tickers.index(ticker)
        return self.values[fld][:, col].copy()

    def field(self, fld: str) -> np.ndarray:
        """The full (n_dates, n_instruments) matrix for a field."""
        return self.values[fld]

    def select_rows(self, mask_or_index) -> "PricePanel":
        """A new panel restricted to the given rows (mask or index array)."""
        dates = self.dates[mask_or_index]
        vals = {k: v[mask_or_index] for k, v in self.values.items()}
        return PricePanel(dates, self.tickers, vals)

    def single(self, ticker: str) -> "PricePanel":
        """A one-instrument view of this panel, as a new panel."""
        col = self.tickers.index(ticker)
        vals = {k: v[:, col : col + 1].copy() for k, v in self.values.items()}
        return PricePanel(self.dates.copy(), (ticker,), vals)

    def close_defined_mask(self) -> np.ndarray:
        """Rows where every instrument has a defined close."""
        return np.all(np.isfinite(self.values["close"]), axis=1)


def panel_from_bars(ticker: str, bars: list[OhlcvBar]) -> PricePanel:
    """Assemble a single-instrument panel from validated bars.

    Bars may arrive unsorted; duplicate dates are an integrity error.
    """
    if not bars:
        raise EmptyPanelError(f"no bars for {ticker}")
    bars = sorted(bars, key=lambda b: b.date)
    for a, b in zip(bars, bars[1:]):
        if a.date == b.date:
            raise IntegrityError(f"{ticker}: duplicate date {a.date}")
    dates = np.array([b.date for b in bars], dtype="datetime64[D]")
    vals = {
        name: np.array([[getattr(b, name)] for b in bars], dtype=np.float64)
        for name in FIELDS
    }
    return PricePanel(dates, (ticker,), vals)


def align_panels(panels: list[PricePanel]) -> PricePanel:
    """Merge single-instrument panels onto the union of their dates.

    Dates an instrument did not trade become NaN rows for it.
    """
    if not panels:
        raise EmptyPanelError("nothing to align")
    for p in panels:
        if p.n_instruments != 1:
            raise IntegrityError("align_panels expects single-instrument panels")
    tickers = tuple(p.tickers[0] for p in panels)
    if len(set(tickers)) != len(tickers):
        raise IntegrityError("duplicate ticker across panels")
    all_dates = np.unique(np.concatenate([p.dates for p in panels]))
    n, k = len(all_dates), len(panels)
    vals = {name: np.full((n, k), np.nan) for name in FIELDS}
    for j, p in enumerate(panels):
        rows = np.searchsorted(all_dates, p.dates)
        for name in FIELDS:
            vals[name][rows, j] = p.values[name][:, 0]
    return PricePanel(all_dates, tickers, vals)


def forward_fill(panel: PricePanel) -> PricePanel:
    """Carry each instrument's last defined value forward over gaps.

    Leading NaNs (before the first observation) stay NaN.  Idempotent.
    Filling happens per field per instrument; a day missing only volume
    gets only volume filled.
    """
    out = {}
    for name in FIELDS:
        arr = panel.values[name]
        n = arr.shape[0]
        idx = np.where(np.isfinite(arr), np.arange(n)[:, None], 0)
        np.maximum.accumulate(idx, axis=0, out=idx)
        # leading gaps keep idx 0, which points at a NaN, so they stay NaN
        out[name] = np.take_along_axis(arr, idx, axis=0)
    return PricePanel(panel.dates.copy(), panel.tickers, out)


def add_months(date: dt.date, months: int) -> dt.date:
    """Calendar-month shift; day-of-month clamps to the target month's end."""
    month_index = date.year * 12 + (date.month - 1) + months
    year, month = divmod(month_index, 12)
    month += 1
    # clamp day (e.g. Jan 31 + 1 month -> Feb 28/29)
    if month == 12:
        last = 31
    else:
        last = (dt.date(year, month + 1, 1) - dt.timedelta(days=1)).day
    return dt.date(year, month, min(date.day, last))


def trim(panel: PricePanel, warmup_months: int = 16, drop_last: bool = True) -> PricePanel:
    """Drop the warm-up prefix and (optionally) the final row.

    The cut-off is the first date on or after ``first_date + warmup_months``
    calendar months; rows strictly before it are removed.  The last row is
    dropped because the forward-looking label is undefined there.
    """
    if warmup_months < 0:
        raise ValueError("warmup_months must be non-negative")
    first = panel.dates[0].astype(dt.date)
    cutoff = np.datetime64(add_months(first, warmup_months), "D")
    keep = panel.dates >= cutoff
    if drop_last:
        keep = keep.copy()
        keep[-1] = False
    if not keep.any():
        raise EmptyPanelError("trim removed every row")
    return panel.select_rows(keep)


def typical_price(panel: PricePanel) -> np.ndarray:
    """(high + low + close) / 3 per instrument; (n_dates, n_instruments)."""
    return (panel.values["high"] + panel.values["low"] + panel.values["close"]) / 3.0


def simple_returns(close: np.ndarray) -> np.ndarray:
    """close[t] / close[t-1] - 1 along axis 0, NaN on the first row."""
    out = np.full_like(close, np.nan)
    prev = close[:-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        out[1:] = close[1:] / prev - 1.0
    out[~np.isfinite(out)] = np.nan
    return out


def check_monotone_dates(dates: np.ndarray, label: str = "series") -> None:
    if not np.all(dates[1:] > dates[:-1]):
        raise IntegrityError(f"{label}: dates must be strictly increasing")


def warn_if_gaps(panel: PricePanel, max_gap_days: int = 7) -> None:
    """Emit a warning when consecutive dates are far apart (data holes)."""
    gaps = np.diff(panel.dates).astype(int)
    big = gaps > max_gap_days
    if big.any():
        i = int(np.argmax(big))
        warnings.warn(
            f"date gap of {int(gaps[i])} days after {panel.dates[i]}",
            stacklevel=2,
        )
