"""Range-based daily price variation from OHLC bars.

All estimators work on the log ranges h = ln(High/Open), l = ln(Low/Open),
c = ln(Close/Open) and are therefore invariant to the price level.  The
composite daily measure averages three range estimators and adds the
squared overnight gap, scaled to squared-percent units.
"""

from __future__ import annotations

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import DataError

FOUR_LN2 = 4.0 * np.log(2.0)
SCALE = 100.0 ** 2


def parkinson(h, l):
    """(h - l)^2 / (4 ln 2)."""
    return (h - l) ** 2 / FOUR_LN2


def garman_klass(h, l, c):
    """0.511 (h-l)^2 - 0.019 (c (h+l) - 2 h l) - 0.383 c^2.

    Coefficients kept exactly as in the source formula (the last one
    differs from the textbook 0.383 * (2 ln 2 - 1) constant); can go
    slightly negative for large |c|.
    """
    return 0.511 * (h - l) ** 2 - 0.019 * (c * (h + l) - 2.0 * h * l) - 0.383 * c ** 2


def rogers_satchell(h, l, c):
    """h (h - c) + l (l - c)."""
    return h * (h - c) + l * (l - c)


def overnight_jump(open_t, close_prev):
    """Squared log return from previous close to today's open."""
    open_t = np.asarray(open_t, dtype=float)
    close_prev = np.asarray(close_prev, dtype=float)
    if (open_t <= 0).any() or (close_prev <= 0).any():
        raise DataError("prices must be positive")
    out = (np.log(open_t) - np.log(close_prev)) ** 2
    return out if out.ndim else float(out)


def realized_range(bar, close_prev=None):
    """Composite daily price variation for one bar, in squared percent.

    ``bar`` is any mapping with open/high/low/close.  With no previous
    close (first day of sample) the overnight term is zero.  The composite
    is floored at zero if the Garman-Klass term drives the average negative.
    """
    o, hi, lo, cl = bar["open"], bar["high"], bar["low"], bar["close"]
    h = np.log(hi) - np.log(o)
    l = np.log(lo) - np.log(o)
    c = np.log(cl) - np.log(o)
    jump = 0.0 if close_prev is None else overnight_jump(o, close_prev)
    body = (parkinson(h, l) + garman_klass(h, l, c) + rogers_satchell(h, l, c)) / 3.0
    return max(0.0, SCALE * (jump + body))


def realized_range_series(ohlc: pd.DataFrame) -> pd.DataFrame:
    """Daily composite variation and its 5-day average for an OHLC frame.

    Returns a frame with columns ``v`` and ``v_weekly`` (NaN until five
    trading days of history exist).  The number of days floored at zero is
    recorded in ``attrs['n_floored']``.
    """
    o = ohlc["open"].to_numpy(float)
    hi = ohlc["high"].to_numpy(float)
    lo = ohlc["low"].to_numpy(float)
    cl = ohlc["close"].to_numpy(float)
    h = np.log(hi) - np.log(o)
    l = np.log(lo) - np.log(o)
    c = np.log(cl) - np.log(o)
    jump = np.zeros(len(o))
    # first day has no prior close; its overnight term stays zero
    jump[1:] = (np.log(o[1:]) - np.log(cl[:-1])) ** 2
    body = (parkinson(h, l) + garman_klass(h, l, c) + rogers_satchell(h, l, c)) / 3.0
    raw = SCALE * (jump + body)
    v = np.maximum(raw, 0.0)
    out = pd.DataFrame({"v": v}, index=ohlc.index)
    out["v_weekly"] = weekly_component(out["v"])
    out.attrs["country_code"] = ohlc.attrs.get("country_code")
    out.attrs["n_floored"] = int((raw < 0).sum())
    return out


def weekly_component(v: pd.Series) -> pd.Series:
    """Mean of the five most recent daily values (trading-day positions)."""
    return v.rolling(5).mean()


def log_variance(vol: pd.DataFrame, offset: float = 1.0) -> pd.DataFrame:
    """ln(offset + v), with the weekly component rebuilt from the logs."""
    v = vol["v"]
    arg = offset + v
    if (arg <= 0).any():
        day = arg.index[arg <= 0][0]
        raise DataError(f"nonpositive log argument on {day.date()}")
    out = pd.DataFrame({"v": np.log(arg.to_numpy())}, index=vol.index)
    out["v_weekly"] = weekly_component(out["v"])
    out.attrs.update(vol.attrs)
    return out


class RangeVolatilityEstimator(BaseEstimator, TransformerMixin):
    """Transformer facade over :func:`realized_range_series`.

    ``log_transform=True`` additionally applies ln(offset + v) and rebuilds
    the weekly component from the transformed dailies.
    """

    def __init__(self, log_transform: bool = False, log_offset: float = 1.0):
        self.log_transform = log_transform
        self.log_offset = log_offset

    def fit(self, X, y=None):
        return self

    def transform(self, X: pd.DataFrame) -> pd.DataFrame:
        out = realized_range_series(X)
        if self.log_transform:
            out = log_variance(out, offset=self.log_offset)
        return out
