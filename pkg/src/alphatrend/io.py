"""Reading, writing and fetching daily OHLCV CSV files.

The on-disk schema follows the common export convention:

    Date,Open,High,Low,Close,Adj Close,Volume

Rows may arrive out of order (they are sorted); duplicate dates and
malformed cells are rejected with the offending line number.  Empty
cells become NaN so gap handling stays a panel-level concern.
"""

from __future__ import annotations

import csv
import datetime as dt
import io as _io
import logging
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import CsvParseError, EmptyPanelError, FetchError, IntegrityError, SchemaError
from .panel import FIELDS, PricePanel

log = logging.getLogger(__name__)

DEFAULT_SCHEMA = {
    "date": "Date",
    "open": "Open",
    "high": "High",
    "low": "Low",
    "close": "Close",
    "adj_close": "Adj Close",
    "volume": "Volume",
}


def _parse_date(text: str, path, line_no: int) -> dt.date:
    try:
        return dt.date.fromisoformat(text.strip())
    except ValueError:
        raise CsvParseError(path, line_no, f"bad date {text!r}") from None


def _parse_cell(text: str, column: str, path, line_no: int) -> float:
    text = text.strip()
    if text == "" or text.lower() in ("null", "na", "nan"):
        return float("nan")
    try:
        return float(text)
    except ValueError:
        raise CsvParseError(path, line_no, f"bad value {text!r} in column {column}") from None


def _read_rows(handle, path, schema: dict[str, str]):
    reader = csv.reader(handle)
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyPanelError(f"{path}: empty file") from None
    header = [h.strip() for h in header]
    col_index = {}
    for key, col_name in schema.items():
        if col_name not in header:
            raise SchemaError(f"{path}: missing required column {col_name!r}")
        col_index[key] = header.index(col_name)

    dates: list[dt.date] = []
    cols: dict[str, list[float]] = {name: [] for name in FIELDS}
    for line_no, row in enumerate(reader, start=2):
        if not row or all(c.strip() == "" for c in row):
            continue
        if len(row) < len(header):
            raise CsvParseError(path, line_no, f"expected {len(header)} cells, got {len(row)}")
        dates.append(_parse_date(row[col_index["date"]], path, line_no))
        for name in FIELDS:
            cols[name].append(_parse_cell(row[col_index[name]], schema[name], path, line_no))
    if not dates:
        raise EmptyPanelError(f"{path}: no data rows")

    order = np.argsort(np.array(dates, dtype="datetime64[D]"), kind="stable")
    sorted_dates = np.array(dates, dtype="datetime64[D]")[order]
    dup = np.nonzero(sorted_dates[1:] == sorted_dates[:-1])[0]
    if dup.size:
        raise IntegrityError(f"{path}: duplicate date {sorted_dates[dup[0]]}")
    values = {
        name: np.asarray(cols[name], dtype=np.float64)[order][:, None] for name in FIELDS
    }
    return sorted_dates, values


def load_csv(path, ticker: str | None = None, schema: dict[str, str] | None = None) -> PricePanel:
    """Load one instrument's history from a CSV file.

    The ticker defaults to the file stem.  Raises SchemaError for a
    missing column, CsvParseError (with line number) for a bad cell and
    IntegrityError for duplicate dates.
    """
    path = Path(path)
    schema = schema or DEFAULT_SCHEMA
    with open(path, "r", encoding="utf-8", newline="") as handle:
        dates, values = _read_rows(handle, path, schema)
    name = ticker if ticker is not None else path.stem
    return PricePanel(dates, (name,), values)


def _format_value(v: float) -> str:
    if not np.isfinite(v):
        return ""
    return repr(float(v))


def write_csv(panel: PricePanel, path, schema: dict[str, str] | None = None) -> None:
    """Write a single-instrument panel; a later load_csv round-trips exactly.

    Values are written with repr so every float survives the text trip
    bit for bit.  NaNs become empty cells.
    """
    if panel.n_instruments != 1:
        raise IntegrityError("write_csv expects a single-instrument panel")
    schema = schema or DEFAULT_SCHEMA
    path = Path(path)
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([schema[k] for k in ("date",) + FIELDS])
    for i, d in enumerate(panel.dates):
        row = [str(d.astype("datetime64[D]"))]
        row += [_format_value(panel.values[name][i, 0]) for name in FIELDS]
        writer.writerow(row)
    _atomic_write_text(path, buf.getvalue())


def _atomic_write_text(path: Path | str, text: str) -> None:
    """Write via a temp file in the same directory plus rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fetch_csv(
    url_template: str,
    ticker: str,
    start: dt.date,
    end: dt.date,
    cache_dir,
    schema: dict[str, str] | None = None,
    timeout: float = 30.0,
    session=None,
) -> PricePanel:
    """Download one instrument's CSV, cache it, and parse it.

    The URL is ``url_template.format(ticker=..., start=..., end=...)``
    with dates in ISO form.  The raw body is validated by parsing before
    the cache file appears, and the write is atomic, so a truncated or
    failed download never leaves a partial file behind.  A cached file
    short-circuits the network entirely.
    """
    cache_dir = Path(cache_dir)
    cache_path = cache_dir / f"{ticker}_{start.isoformat()}_{end.isoformat()}.csv"
    if cache_path.exists():
        log.info("cache hit for %s", ticker)
        return load_csv(cache_path, ticker=ticker, schema=schema)

    url = url_template.format(ticker=ticker, start=start.isoformat(), end=end.isoformat())
    if session is None:
        import requests

        session = requests
    try:
        resp = session.get(url, timeout=timeout)
    except Exception as exc:  # connection-level failure
        raise FetchError(url, None, str(exc)) from exc
    if resp.status_code != 200:
        raise FetchError(url, resp.status_code, "unexpected status")
    body = resp.text

    # Parse first: a malformed body must not end up in the cache.
    schema = schema or DEFAULT_SCHEMA
    dates, values = _read_rows(_io.StringIO(body), url, schema)
    panel = PricePanel(dates, (ticker,), values)
    _atomic_write_text(cache_path, body)
    log.info("fetched %s (%d rows)", ticker, panel.n_dates)
    return panel
