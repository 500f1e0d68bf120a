"""Loading and calendar alignment of OHLC and search-volume data.

This module is the single entry point for file ingestion.  It enforces the
data contracts early (strictly increasing dates, OHLC ordering, SVI range)
so that the numerical layers can assume clean input.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from datetime import date as Date

import numpy as np
import pandas as pd

from .exceptions import CountryRejectedError, DataError

logger = logging.getLogger(__name__)

OHLC_COLUMNS = ("date", "open", "high", "low", "close")

# Exchanges at or east of this UTC offset close before the bulk of the
# worldwide (UTC-referenced) search day accrues, so their search value for
# day D is matched with trading day D+1.
DEFAULT_TZ_SHIFT_THRESHOLD_HOURS = 3


@dataclass(frozen=True)
class TradingCalendar:
    """Trading days and time zone of one exchange."""

    country_code: str
    trading_days: pd.DatetimeIndex
    utc_offset_hours: int

    def __post_init__(self):
        days = pd.DatetimeIndex(self.trading_days)
        if not (days.is_monotonic_increasing and days.is_unique):
            raise DataError(
                f"{self.country_code}: trading days must be strictly increasing"
            )
        if not -12 <= self.utc_offset_hours <= 14:
            raise DataError(
                f"{self.country_code}: utc_offset_hours out of range "
                f"({self.utc_offset_hours})"
            )
        object.__setattr__(self, "trading_days", days)

    def __contains__(self, day) -> bool:
        return pd.Timestamp(day) in self.trading_days


@dataclass(frozen=True)
class CountryMeta:
    """Static per-country covariates from countries.csv."""

    iso2: str
    name: str
    utc_offset_hours: int
    capital_lat: float
    capital_lon: float
    exports_to_rus: float
    imports_from_rus: float
    gdp: float
    doo: float = field(default=float("nan"))
    dist: float = field(default=float("nan"))


def load_calendar(path, country_code: str, utc_offset_hours: int) -> TradingCalendar:
    """Load a `<ISO2>_calendar.csv` trading-day list."""
    frame = pd.read_csv(path)
    if "date" not in frame.columns:
        raise DataError(f"{path}: calendar file must have a 'date' column")
    days = pd.DatetimeIndex(pd.to_datetime(frame["date"], format="ISO8601"))
    return TradingCalendar(country_code, days, utc_offset_hours)


def load_country_meta(path) -> dict[str, CountryMeta]:
    """Load countries.csv and derive openness / distance covariates."""
    from .economy import degree_of_openness, distance_to_moscow

    frame = pd.read_csv(path)
    required = {
        "iso2", "name", "utc_offset_hours", "capital_lat", "capital_lon",
        "exports_to_rus", "imports_from_rus", "gdp",
    }
    missing = required - set(frame.columns)
    if missing:
        raise DataError(f"{path}: missing columns {sorted(missing)}")
    out: dict[str, CountryMeta] = {}
    for row in frame.itertuples(index=False):
        meta = CountryMeta(
            iso2=row.iso2,
            name=row.name,
            utc_offset_hours=int(row.utc_offset_hours),
            capital_lat=float(row.capital_lat),
            capital_lon=float(row.capital_lon),
            exports_to_rus=float(row.exports_to_rus),
            imports_from_rus=float(row.imports_from_rus),
            gdp=float(row.gdp),
        )
        doo = degree_of_openness(meta.exports_to_rus, meta.imports_from_rus, meta.gdp)
        dist = distance_to_moscow(meta.capital_lat, meta.capital_lon)
        out[row.iso2] = CountryMeta(
            **{**meta.__dict__, "doo": doo, "dist": float(dist)}
        )
    return out


def _parse_price(raw: str, line_no: int, column: str) -> float | None:
    raw = raw.strip()
    if raw == "":
        return None
    try:
        value = float(raw)
    except ValueError as exc:
        raise DataError(f"line {line_no}: malformed {column} value {raw!r}") from exc
    return value


def load_ohlc(path, calendar: TradingCalendar) -> pd.DataFrame:
    """Load one country's OHLC CSV into a date-indexed frame.

    Any row with a missing open/high/low cell rejects the whole country.
    A missing close is repaired by carrying the previous close forward and
    logged.  OHLC ordering violations raise with the offending date.
    """
    try:
        handle = open(path, newline="")
    except FileNotFoundError as exc:
        raise DataError(f"OHLC file not found: {path}") from exc

    rows = []
    with handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != OHLC_COLUMNS:
            raise DataError(f"{path}: expected header {','.join(OHLC_COLUMNS)}")
        prev_close = None
        for line_no, row in enumerate(reader, start=2):
            if not row or all(cell.strip() == "" for cell in row):
                continue
            if len(row) != 5:
                raise DataError(f"line {line_no}: expected 5 fields, got {len(row)}")
            try:
                day = pd.Timestamp(row[0].strip())
            except ValueError as exc:
                raise DataError(f"line {line_no}: malformed date {row[0]!r}") from exc
            o = _parse_price(row[1], line_no, "open")
            h = _parse_price(row[2], line_no, "high")
            l = _parse_price(row[3], line_no, "low")
            c = _parse_price(row[4], line_no, "close")
            if o is None or h is None or l is None:
                raise CountryRejectedError(
                    f"{calendar.country_code}: missing open/high/low on "
                    f"{day.date()} (line {line_no}); country rejected"
                )
            if c is None:
                if prev_close is None:
                    raise CountryRejectedError(
                        f"{calendar.country_code}: missing close on first row "
                        f"(line {line_no}); nothing to carry forward"
                    )
                c = prev_close
                logger.info(
                    "%s: repaired missing close on %s by carrying forward",
                    calendar.country_code, day.date(),
                )
            rows.append((day, o, h, l, c))
            prev_close = c

    frame = pd.DataFrame(rows, columns=["date", "open", "high", "low", "close"])
    frame = frame.set_index("date")
    _validate_ohlc(frame, calendar)
    frame.attrs["country_code"] = calendar.country_code
    return frame


def _validate_ohlc(frame: pd.DataFrame, calendar: TradingCalendar) -> None:
    if not frame.index.is_monotonic_increasing or not frame.index.is_unique:
        raise DataError(f"{calendar.country_code}: OHLC dates must be strictly increasing")
    outside = frame.index.difference(calendar.trading_days)
    if len(outside):
        raise DataError(
            f"{calendar.country_code}: OHLC dates outside trading calendar: "
            f"{[d.date() for d in outside[:5]]}"
        )
    for day, o, h, l, c in frame.itertuples():
        if min(o, h, l, c) <= 0:
            raise DataError(f"{day.date()}: nonpositive price")
        if h < max(o, c) or l > min(o, c) or h < l:
            raise DataError(f"{day.date()}: OHLC ordering violated (h={h}, l={l})")


def load_svi_long(path) -> pd.DataFrame:
    """Load a long-format SVI CSV (`date,topic,value`) into a date x topic frame."""
    try:
        frame = pd.read_csv(path)
    except FileNotFoundError as exc:
        raise DataError(f"SVI file not found: {path}") from exc
    expected = {"date", "topic", "value"}
    if set(frame.columns) != expected:
        raise DataError(f"{path}: expected columns date,topic,value")
    bad = frame[(frame["value"] < 0) | (frame["value"] > 100)]
    if len(bad):
        first = bad.iloc[0]
        raise DataError(
            f"{path}: SVI value out of [0, 100] for topic {first['topic']} "
            f"on {first['date']}"
        )
    frame["date"] = pd.to_datetime(frame["date"], format="ISO8601")
    wide = frame.pivot(index="date", columns="topic", values="value").sort_index()
    if wide.isna().any().any():
        topic = wide.columns[wide.isna().any()][0]
        raise DataError(f"{path}: topic {topic!r} has gaps in its date coverage")
    return wide


def shift_to_exchange_day(
    svi: pd.Series,
    calendar: TradingCalendar,
    threshold_hours: int = DEFAULT_TZ_SHIFT_THRESHOLD_HOURS,
) -> pd.Series:
    """Relabel UTC-referenced daily SVI to the exchange-local trading day.

    Exchanges with utc_offset_hours >= threshold_hours close before the
    search day's activity accrues, so day D is matched to trading day D+1;
    everywhere else the label is kept.  Only labels move, never values.
    """
    if svi.empty:
        return svi.copy()
    if calendar.utc_offset_hours >= threshold_hours:
        shifted = svi.copy()
        shifted.index = shifted.index + pd.Timedelta(days=1)
        return shifted
    return svi.copy()


def collapse_nontrading(svi: pd.Series, calendar: TradingCalendar) -> pd.Series:
    """Fold non-trading-day SVI values onto the preceding trading day.

    For every maximal run of non-trading days, the preceding trading day
    receives the maximum over its own value and the run (weekend rule,
    applied identically to holidays).  Non-trading dates are removed.  A
    run before the first trading day has no anchor and is dropped with a
    warning.
    """
    trading = set(calendar.trading_days)
    out_dates: list[pd.Timestamp] = []
    out_values: list[float] = []
    dropped = 0
    for day, value in svi.sort_index().items():
        if day in trading:
            out_dates.append(day)
            out_values.append(value)
        elif out_dates:
            out_values[-1] = max(out_values[-1], value)
        else:
            dropped += 1
    if dropped:
        logger.warning(
            "%s: dropped %d leading non-trading observation(s) with no "
            "preceding trading day", calendar.country_code, dropped,
        )
    return pd.Series(out_values, index=pd.DatetimeIndex(out_dates), name=svi.name)


def split_sample(obj, split_date):
    """Partition a date-indexed series/frame at split_date.

    Returns (pre, onset) where pre holds dates strictly before split_date
    and onset the rest; concatenating the two reproduces the input.
    """
    cutoff = pd.Timestamp(split_date)
    index = obj.index
    if not index.is_monotonic_increasing:
        raise DataError("split_sample requires sorted dates")
    return obj.loc[index < cutoff], obj.loc[index >= cutoff]


def join_on_dates(*series) -> pd.DataFrame:
    """Inner-join date-indexed series/frames on their common dates."""
    if not series:
        raise ValueError("join_on_dates needs at least one input")
    joined = pd.concat(series, axis=1, join="inner")
    if joined.empty:
        raise DataError("no overlapping dates between inputs")
    return joined
