"""Binary trend labels from typical prices.

Both rules look ``horizon_days`` ahead, so the final rows of a panel
never receive labels; both compare strictly, so borderline moves count
as 0.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyPanelError, IntegrityError
from .panel import PricePanel, typical_price

log = logging.getLogger(__name__)

SHORT_THRESHOLD_PCT = 0.1
LONG_LOOKBACK = 60
LONG_PERCENTILE = 75.0


@dataclass
class LabelVector:
    dates: np.ndarray
    values: np.ndarray  # int8 of 0/1
    horizon: str  # 'short' | 'long'
    params: dict

    def __post_init__(self):
        self.dates = np.asarray(self.dates, dtype="datetime64[D]")
        self.values = np.asarray(self.values, dtype=np.int8)
        if self.dates.shape != self.values.shape:
            raise IntegrityError("label dates and values differ in length")

    @property
    def n_rows(self) -> int:
        return len(self.dates)

    def positive_rate(self) -> float:
        return float(self.values.mean()) if len(self.values) else float("nan")


def _tp_series(panel: PricePanel) -> np.ndarray:
    if panel.n_instruments != 1:
        raise IntegrityError("labels are defined for a single-instrument panel")
    tp = typical_price(panel)[:, 0]
    if not np.isfinite(tp).all():
        raise IntegrityError("typical price has undefined values; forward-fill first")
    return tp


def short_term_labels(
    panel: PricePanel,
    threshold_pct: float = SHORT_THRESHOLD_PCT,
    horizon_days: int = 1,
) -> LabelVector:
    """1 when the typical price gains strictly more than threshold_pct.

    The percentage change to ``horizon_days`` ahead is compared against
    the threshold in percent; the final ``horizon_days`` rows drop out.
    """
    if horizon_days < 1:
        raise ValueError("horizon_days must be >= 1")
    tp = _tp_series(panel)
    n = len(tp)
    if n <= horizon_days:
        raise EmptyPanelError("panel too short to label")
    change_pct = (tp[horizon_days:] - tp[:-horizon_days]) / tp[:-horizon_days] * 100.0
    values = (change_pct > threshold_pct).astype(np.int8)
    out = LabelVector(
        panel.dates[:-horizon_days],
        values,
        "short",
        {"threshold_pct": threshold_pct, "horizon_days": horizon_days},
    )
    log.info("short labels: %d rows, positive rate %.4f", out.n_rows, out.positive_rate())
    return out


def nearest_rank_percentile(values: np.ndarray, pct: float) -> float:
    """The k-th smallest with k = ceil(pct/100 * n) (nearest-rank)."""
    if len(values) == 0:
        raise ValueError("empty sample")
    if not (0.0 < pct <= 100.0):
        raise ValueError(f"percentile must be in (0, 100], got {pct}")
    k = math.ceil(pct / 100.0 * len(values))
    return float(np.sort(np.asarray(values, dtype=np.float64))[k - 1])


def long_term_labels(
    panel: PricePanel,
    lookback: int = LONG_LOOKBACK,
    percentile: float = LONG_PERCENTILE,
    horizon_days: int = 1,
) -> LabelVector:
    """1 when the forward return clears its own recent-history percentile.

    The forward typical-price return over ``horizon_days`` is compared
    (strictly) with the nearest-rank percentile of the ``lookback``
    previous forward returns.  The first ``lookback`` rows have no full
    history and the final ``horizon_days`` rows no forward return, so
    both ends drop out.
    """
    if horizon_days < 1:
        raise ValueError("horizon_days must be >= 1")
    if lookback < 1:
        raise ValueError("lookback must be >= 1")
    if not (0.0 < percentile <= 100.0):
        raise ValueError(f"percentile must be in (0, 100], got {percentile}")
    tp = _tp_series(panel)
    n = len(tp)
    if n <= lookback + horizon_days:
        raise EmptyPanelError("panel too short for the lookback window")
    fwd = (tp[horizon_days:] - tp[:-horizon_days]) / tp[:-horizon_days]
    # fwd[t] is the forward return of row t; defined for t < n - horizon
    m = len(fwd)
    windows = np.lib.stride_tricks.sliding_window_view(fwd, lookback)
    # windows[s] covers fwd[s : s + lookback]; for row t the history is
    # fwd[t - lookback : t], i.e. windows[t - lookback]
    hist = np.sort(windows[:-1], axis=1) if m > lookback else np.empty((0, lookback))
    k = math.ceil(percentile / 100.0 * lookback)
    bench = hist[:, k - 1]
    t_idx = np.arange(lookback, m)
    values = (fwd[t_idx] > bench).astype(np.int8)
    out = LabelVector(
        panel.dates[t_idx],
        values,
        "long",
        {
            "lookback": lookback,
            "percentile": percentile,
            "horizon_days": horizon_days,
        },
    )
    log.info("long labels: %d rows, positive rate %.4f", out.n_rows, out.positive_rate())
    return out
