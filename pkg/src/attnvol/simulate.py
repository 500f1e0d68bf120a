"""Synthetic 51-country dataset generator.

Produces a complete input directory (OHLC files, trading calendars,
country metadata, conflict/general search-volume panels and a ready-made
run config) whose data-generating process has conflict attention moving
next-day volatility only after the sample split date, with the effect
increasing in trade openness and decreasing in distance to Moscow.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import pandas as pd

from . import attention, calendars
from .economy import distance_to_moscow

logger = logging.getLogger(__name__)

START = "2021-06-12"          # 270-day worldwide search window
END = "2022-03-08"
TRADING_START = "2021-06-22"
SPLIT = "2022-01-01"
INVASION = "2022-02-24"

CONFLICT_TOPICS = ["russia", "ukraine", "vladimir_putin", "nato", "sanctions"]

GENERAL_TOPICS = [
    "asset_allocation", "bloomberg", "day_trading", "dividend_yield",
    "earnings_call", "earnings_per_share", "etf", "financial_crisis",
    "financial_market", "futures_contract", "google_finance",
    "government_bond", "hedge_fund", "implied_volatility",
    "market_capitalization", "market_liquidity", "market_sentiment", "msci",
    "mutual_fund", "option_contract", "pension_fund", "pe_ratio",
    "quarterly_report", "stock_market_index", "stock_market",
    "technical_analysis", "ticker_symbol", "vix", "volatility",
    "yahoo_finance", "yield_curve",
]

# iso2, name, capital latitude/longitude (approximate), UTC offset hours.
# 19 European, 8 American, 3 African and 21 Asia-Pacific markets.
COUNTRIES = [
    ("AT", "Austria", 48.21, 16.37, 1),
    ("BE", "Belgium", 50.85, 4.35, 1),
    ("CH", "Switzerland", 46.95, 7.45, 1),
    ("CZ", "Czechia", 50.08, 14.44, 1),
    ("DE", "Germany", 52.52, 13.41, 1),
    ("DK", "Denmark", 55.68, 12.57, 1),
    ("ES", "Spain", 40.42, -3.70, 1),
    ("FI", "Finland", 60.17, 24.94, 2),
    ("FR", "France", 48.86, 2.35, 1),
    ("GB", "United Kingdom", 51.51, -0.13, 0),
    ("HU", "Hungary", 47.50, 19.04, 1),
    ("IE", "Ireland", 53.35, -6.26, 0),
    ("IT", "Italy", 41.90, 12.50, 1),
    ("LV", "Latvia", 56.95, 24.11, 2),
    ("NL", "Netherlands", 52.37, 4.89, 1),
    ("NO", "Norway", 59.91, 10.75, 1),
    ("PL", "Poland", 52.23, 21.01, 1),
    ("PT", "Portugal", 38.72, -9.14, 0),
    ("SE", "Sweden", 59.33, 18.07, 1),
    ("US", "United States", 38.90, -77.04, -5),
    ("CA", "Canada", 45.42, -75.70, -5),
    ("MX", "Mexico", 19.43, -99.13, -6),
    ("BR", "Brazil", -15.79, -47.88, -3),
    ("AR", "Argentina", -34.60, -58.38, -3),
    ("CL", "Chile", -33.45, -70.67, -4),
    ("CO", "Colombia", 4.71, -74.07, -5),
    ("PE", "Peru", -12.05, -77.04, -5),
    ("ZA", "South Africa", -25.75, 28.19, 2),
    ("EG", "Egypt", 30.04, 31.24, 2),
    ("NG", "Nigeria", 9.08, 7.40, 1),
    ("AU", "Australia", -35.28, 149.13, 10),
    ("NZ", "New Zealand", -41.29, 174.78, 12),
    ("JP", "Japan", 35.68, 139.69, 9),
    ("KR", "South Korea", 37.57, 126.98, 9),
    ("CN", "China", 39.90, 116.41, 8),
    ("HK", "Hong Kong", 22.32, 114.17, 8),
    ("TW", "Taiwan", 25.03, 121.57, 8),
    ("SG", "Singapore", 1.35, 103.82, 8),
    ("MY", "Malaysia", 3.14, 101.69, 8),
    ("TH", "Thailand", 13.76, 100.50, 7),
    ("ID", "Indonesia", -6.21, 106.85, 7),
    ("PH", "Philippines", 14.60, 120.98, 8),
    ("IN", "India", 28.61, 77.21, 5),
    ("PK", "Pakistan", 33.69, 73.06, 5),
    ("VN", "Vietnam", 21.03, 105.85, 7),
    ("IL", "Israel", 31.77, 35.21, 2),
    ("TR", "Turkey", 39.93, 32.86, 3),
    ("SA", "Saudi Arabia", 24.69, 46.72, 3),
    ("AE", "United Arab Emirates", 24.45, 54.38, 4),
    ("QA", "Qatar", 25.29, 51.53, 3),
    ("KW", "Kuwait", 29.38, 47.99, 3),
]

# DGP coefficients for next-day variance (squared percent units)
B0 = 0.10
B_DAILY = 0.30
B_WEEKLY = 0.25
B_GENERAL = 0.03
NOISE_SD = 0.12
OVERNIGHT_SHARE = 0.10
INTRADAY_STEPS = 78


def _conflict_attention_effect(doo: float, dist: float) -> float:
    """Onset-period loading of conflict attention, rising with openness and
    falling with distance (kept strictly positive)."""
    return max(0.6 + 8.0 * doo + 0.7 * max(0.0, 1.0 - dist / 9.0), 0.2)


def _logistic(x):
    return 1.0 / (1.0 + np.exp(-x))


def _simulate_conflict_panel(dates, rng) -> pd.DataFrame:
    """Flat noisy interest before the split, explosive growth after.

    A common day-level shock multiplies all topics after the split so the
    aggregated index has genuine day-to-day variation on top of the ramp.
    """
    onset = dates >= pd.Timestamp("2022-01-01")
    d_split = (dates - pd.Timestamp("2022-01-01")).days.to_numpy(float)
    to_invasion = (dates - pd.Timestamp(INVASION)).days.to_numpy(float)
    base = np.full(len(dates), 5.0)
    ramp = 12.0 * np.exp(0.028 * np.clip(d_split, 0.0, None)) \
        + 45.0 * _logistic(to_invasion / 2.0)
    base = np.where(onset, ramp, base)
    common = np.where(onset, np.exp(rng.normal(0.0, 0.22, len(dates))), 1.0)
    panel = {}
    for i, topic in enumerate(CONFLICT_TOPICS):
        scale = 0.75 + 0.1 * i
        noise = rng.normal(0, 1.2, len(dates))
        series = np.clip(scale * base * common + noise, 0.0, None)
        panel[topic] = 100.0 * series / series.max()
    return pd.DataFrame(panel, index=dates)


def _simulate_general_panel(dates, rng) -> pd.DataFrame:
    n = len(dates)
    common = np.zeros(n)
    for t in range(1, n):
        common[t] = 0.9 * common[t - 1] + rng.normal(0, 3.0)
    panel = {}
    for topic in GENERAL_TOPICS:
        level = rng.uniform(35.0, 65.0)
        series = level + common + rng.normal(0, 4.0, n)
        panel[topic] = np.clip(series, 0.0, 100.0)
    # one deliberately contrarian topic so the pruning step has work to do
    anti = 100.0 - (50.0 + common) + rng.normal(0, 4.0, n)
    panel["financial_crisis"] = np.clip(anti, 0.0, 100.0)
    return pd.DataFrame(panel, index=dates)


def _trading_days(rng) -> pd.DatetimeIndex:
    span = pd.bdate_range(TRADING_START, END)
    n_holidays = rng.integers(2, 7)
    drop = rng.choice(len(span), size=n_holidays, replace=False)
    keep = np.ones(len(span), dtype=bool)
    keep[drop] = False
    return span[keep]


def _bridge_extremes(starts, ends, step_var, rng):
    u1 = rng.random(starts.shape)
    u2 = rng.random(starts.shape)
    gap = (ends - starts) ** 2
    seg_max = (starts + ends + np.sqrt(gap - 2.0 * step_var * np.log(u1))) / 2.0
    seg_min = (starts + ends - np.sqrt(gap - 2.0 * step_var * np.log(u2))) / 2.0
    return seg_max.max(axis=-1), seg_min.min(axis=-1)


def _simulate_ohlc(days, variance, rng) -> pd.DataFrame:
    """OHLC bars whose measured price variation equals the target series.

    Bar shapes come from a simulated intraday random walk; the log ranges
    are then rescaled so that the composite range estimator reproduces the
    target variance exactly (the range-estimator sampling noise would
    otherwise drown the data-generating signal).
    """
    from .volatility import garman_klass, parkinson, rogers_satchell

    n = len(days)
    opens = np.empty(n)
    highs = np.empty(n)
    lows = np.empty(n)
    closes = np.empty(n)
    log_close = np.log(1000.0)
    for t in range(n):
        daily_var = variance[t] / 1e4
        jump_sd = np.sqrt(OVERNIGHT_SHARE * daily_var)
        jump = rng.normal(0, jump_sd) if t > 0 else 0.0
        if jump ** 2 >= 0.9 * daily_var:
            jump = np.sign(jump) * np.sqrt(0.9 * daily_var)
        body_target = daily_var - jump ** 2
        log_open = log_close + jump

        step_var = daily_var / INTRADAY_STEPS
        steps = rng.normal(0, np.sqrt(step_var), INTRADAY_STEPS)
        path = np.cumsum(steps)
        starts = np.concatenate([[0.0], path[:-1]])
        hi, lo = _bridge_extremes(starts, path, step_var, rng)
        h, l, c = max(hi, 0.0), min(lo, 0.0), path[-1]
        body_raw = (parkinson(h, l) + garman_klass(h, l, c)
                    + rogers_satchell(h, l, c)) / 3.0
        scale = np.sqrt(body_target / body_raw) if body_raw > 0 else 0.0
        h, l, c = h * scale, l * scale, c * scale

        opens[t] = np.exp(log_open)
        highs[t] = np.exp(log_open + h)
        lows[t] = np.exp(log_open + l)
        closes[t] = np.exp(log_open + c)
        log_close = log_open + c
    return pd.DataFrame(
        {"open": opens, "high": highs, "low": lows, "close": closes}, index=days
    )


def simulate_dataset(out_dir, seed: int = 0, n_countries: int | None = None) -> Path:
    """Write a synthetic input directory; returns its path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    countries = COUNTRIES if n_countries is None else COUNTRIES[:n_countries]

    svi_dates = pd.date_range(START, END, freq="D")
    conflict = _simulate_conflict_panel(svi_dates, rng)
    general = _simulate_general_panel(svi_dates, rng)
    for name, panel in [("conflict", conflict), ("general", general)]:
        long = panel.round(4).reset_index(names="date").melt(
            id_vars="date", var_name="topic", value_name="value"
        )
        long["date"] = long["date"].dt.strftime("%Y-%m-%d")
        long.sort_values(["topic", "date"]).to_csv(out / f"{name}.csv", index=False)

    conflict_pruned, _ = attention.prune_topics(conflict)
    general_pruned, _ = attention.prune_topics(general)

    split_ts = pd.Timestamp(SPLIT)
    meta_rows = []
    for iso2, name, lat, lon, offset in countries:
        dist = distance_to_moscow(lat, lon)
        gdp = float(rng.lognormal(np.log(4e11), 0.8))
        if iso2 == "LV":
            doo = 0.25  # deliberate openness outlier, far from the rest
        else:
            doo = float(np.clip(
                rng.lognormal(np.log(0.015), 0.7) + 0.02 * np.exp(-dist / 2.0),
                0.002, 0.09,
            ))
        share = rng.uniform(0.3, 0.7)
        meta_rows.append({
            "iso2": iso2, "name": name, "utc_offset_hours": offset,
            "capital_lat": lat, "capital_lon": lon,
            "exports_to_rus": round(doo * gdp * share, 2),
            "imports_from_rus": round(doo * gdp * (1 - share), 2),
            "gdp": round(gdp, 2),
        })

        cal_days = _trading_days(rng)
        calendar = calendars.TradingCalendar(iso2, cal_days, offset)
        pd.DataFrame({"date": cal_days.strftime("%Y-%m-%d")}).to_csv(
            out / f"{iso2}_calendar.csv", index=False
        )

        c_series = _aligned_index(conflict_pruned, calendar)
        g_series = _aligned_index(general_pruned, calendar)
        aligned = pd.concat(
            [c_series.rename("c"), g_series.rename("g")], axis=1, join="inner"
        ).dropna()
        days = aligned.index

        b3 = _conflict_attention_effect(doo, dist)
        variance = np.empty(len(days))
        variance[:5] = 0.6
        for t in range(4, len(days) - 1):
            vw = variance[t - 4:t + 1].mean()
            c_loading = b3 if days[t] >= split_ts else 0.0
            mean = (
                B0 + B_DAILY * variance[t] + B_WEEKLY * vw
                + c_loading * aligned["c"].iloc[t]
                + B_GENERAL * aligned["g"].iloc[t]
            )
            variance[t + 1] = max(0.05, mean + rng.normal(0, NOISE_SD + 0.1 * mean))
        ohlc = _simulate_ohlc(days, variance, rng)
        ohlc.round(4).reset_index(names="date").assign(
            date=lambda f: f["date"].dt.strftime("%Y-%m-%d")
        ).to_csv(out / f"{iso2}.csv", index=False)

    pd.DataFrame(meta_rows).to_csv(out / "countries.csv", index=False)

    config = "\n".join([
        "# synthetic fixture run configuration",
        "data_dir = .",
        f"split_date = {SPLIT}",
        "robustness_splits = 2021-12-01, 2021-12-15, 2022-01-15",
        "log_variance = false",
        "interaction = both",
        "attention_scope = worldwide",
        "zero_offset = 1",
        "dummy_set.invasion_week = 2022-02-21..2022-02-25",
        "threads = 4",
        "",
    ])
    (out / "run.cfg").write_text(config)
    logger.info("wrote synthetic dataset for %d countries to %s", len(countries), out)
    return out


def _aligned_index(pruned_panel: pd.DataFrame, calendar) -> pd.Series:
    """Replicate the pipeline's per-country attention alignment."""
    collapsed = {}
    first_day = calendar.trading_days[0]
    for topic in pruned_panel.columns:
        shifted = calendars.shift_to_exchange_day(pruned_panel[topic], calendar)
        shifted = shifted[shifted.index >= first_day]
        collapsed[topic] = calendars.collapse_nontrading(shifted, calendar)
    return attention.build_index(pd.DataFrame(collapsed).dropna())
