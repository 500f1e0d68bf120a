"""Attention-driven volatility toolkit.

Builds search-based attention indices, range-based daily price variation,
and quantifies the one-day-ahead impact of attention on volatility via
per-country HAR-X regressions and fixed-effects panels with robust
inference.
"""

from .attention import AttentionIndexBuilder, asvi, build_index, prune_topics
from .calendars import (
    TradingCalendar,
    collapse_nontrading,
    join_on_dates,
    load_ohlc,
    load_svi_long,
    shift_to_exchange_day,
    split_sample,
)
from .economy import degree_of_openness, distance_to_moscow
from .panel import (
    FixedEffectsPanelRegressor,
    build_panel,
    cips_test,
    driscoll_kraay_cov,
    fe_dk_fit,
    fe_within,
)
from .regression import (
    HarXRegressor,
    build_har_dataset,
    ljung_box,
    newey_west_cov,
    ols_fit,
    white_test,
)
from .volatility import (
    RangeVolatilityEstimator,
    garman_klass,
    log_variance,
    overnight_jump,
    parkinson,
    realized_range,
    realized_range_series,
    rogers_satchell,
    weekly_component,
)

__version__ = "0.1.0"

__all__ = [
    "AttentionIndexBuilder",
    "FixedEffectsPanelRegressor",
    "HarXRegressor",
    "RangeVolatilityEstimator",
    "TradingCalendar",
    "asvi",
    "build_har_dataset",
    "build_index",
    "build_panel",
    "cips_test",
    "collapse_nontrading",
    "degree_of_openness",
    "distance_to_moscow",
    "driscoll_kraay_cov",
    "fe_dk_fit",
    "fe_within",
    "garman_klass",
    "join_on_dates",
    "ljung_box",
    "load_ohlc",
    "load_svi_long",
    "log_variance",
    "newey_west_cov",
    "ols_fit",
    "overnight_jump",
    "parkinson",
    "prune_topics",
    "realized_range",
    "realized_range_series",
    "rogers_satchell",
    "shift_to_exchange_day",
    "split_sample",
    "weekly_component",
    "white_test",
]
