import numpy as np
import pandas as pd
import pytest
from hypothesis import given, strategies as st

from attnvol.exceptions import DataError
from attnvol.volatility import (
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


def make_ohlc(rows, start="2021-06-01"):
    idx = pd.bdate_range(start, periods=len(rows))
    return pd.DataFrame(rows, index=idx, columns=["open", "high", "low", "close"])


class TestPointEstimators:
    def test_parkinson_value(self):
        assert parkinson(0.02, -0.01) == pytest.approx(3.2461e-4, rel=1e-4)

    def test_parkinson_zero_range(self):
        assert parkinson(0.0, 0.0) == 0.0

    def test_garman_klass_value(self):
        assert garman_klass(0.02, -0.01, 0.01) == pytest.approx(4.121e-4, abs=1e-6)

    def test_garman_klass_negative_for_gap_style_bar(self):
        # tiny intraday range with a large close move: the 0.383 c^2 term wins
        assert garman_klass(0.03, 0.029, 0.03) < 0

    def test_rogers_satchell_close_at_high(self):
        assert rogers_satchell(0.02, -0.01, 0.02) == pytest.approx(3e-4, rel=1e-10)

    def test_rogers_satchell_close_at_open(self):
        assert rogers_satchell(0.02, -0.02, 0.0) == pytest.approx(8e-4, rel=1e-10)

    def test_overnight_jump_value(self):
        assert overnight_jump(101.0, 100.0) == pytest.approx(9.9007e-5, rel=1e-4)

    def test_overnight_jump_rejects_nonpositive(self):
        with pytest.raises(DataError):
            overnight_jump(0.0, 100.0)

    @given(
        h=st.floats(0, 0.2),
        depth=st.floats(0, 0.2),
        frac=st.floats(0, 1),
    )
    def test_rogers_satchell_nonnegative(self, h, depth, frac):
        # close anywhere inside [low, high] keeps the estimator nonnegative
        l = -depth
        c = l + frac * (h - l)
        assert rogers_satchell(h, l, c) >= -1e-15


class TestRealizedRange:
    def test_composite_without_jump(self):
        # bar built so the log ranges are exactly h=0.02, l=-0.01, c=0.01
        bar = {
            "open": 100.0,
            "high": 100.0 * np.exp(0.02),
            "low": 100.0 * np.exp(-0.01),
            "close": 100.0 * np.exp(0.01),
        }
        assert realized_range(bar) == pytest.approx(3.789, abs=1e-3)

    def test_composite_with_jump(self):
        bar = {
            "open": 101.0,
            "high": 101.0 * np.exp(0.02),
            "low": 101.0 * np.exp(-0.01),
            "close": 101.0 * np.exp(0.01),
        }
        out = realized_range(bar, close_prev=100.0)
        no_jump = realized_range(bar)
        assert out - no_jump == pytest.approx(1e4 * 9.9007e-5, rel=1e-4)
        assert out == pytest.approx(4.779, abs=1e-3)

    def test_flat_bar_is_zero(self):
        bar = {"open": 50.0, "high": 50.0, "low": 50.0, "close": 50.0}
        assert realized_range(bar) == 0.0

    def test_floor_at_zero(self):
        # pure close move with no range: GK term is negative, floor applies
        bar = {"open": 100.0, "high": 103.0, "low": 100.0, "close": 103.0}
        h = np.log(1.03)
        raw = (parkinson(h, 0) + garman_klass(h, 0, h) + rogers_satchell(h, 0, h)) / 3
        assert raw > 0  # this bar does not trip the floor
        bar2 = {"open": 100.0, "high": 100.0, "low": 97.0, "close": 97.0}
        assert realized_range(bar2) >= 0.0


class TestRealizedRangeSeries:
    def test_matches_scalar_path(self):
        rows = [
            [100.0, 102.0, 99.0, 101.0],
            [101.5, 103.0, 100.5, 102.0],
            [102.0, 102.5, 100.0, 100.5],
        ]
        ohlc = make_ohlc(rows)
        out = realized_range_series(ohlc)
        assert out["v"].iloc[0] == pytest.approx(realized_range(dict(zip(
            ["open", "high", "low", "close"], rows[0]))))
        assert out["v"].iloc[1] == pytest.approx(realized_range(dict(zip(
            ["open", "high", "low", "close"], rows[1])), close_prev=101.0))

    def test_first_day_has_no_jump(self):
        rows = [[100.0, 101.0, 99.5, 100.2]]
        out = realized_range_series(make_ohlc(rows))
        bar = dict(zip(["open", "high", "low", "close"], rows[0]))
        assert out["v"].iloc[0] == pytest.approx(realized_range(bar))

    def test_weekly_nan_until_five_days(self):
        rows = [[100.0, 101.0, 99.0, 100.0]] * 7
        out = realized_range_series(make_ohlc(rows))
        assert out["v_weekly"].iloc[:4].isna().all()
        assert out["v_weekly"].iloc[4:].notna().all()
        assert out["v_weekly"].iloc[4] == pytest.approx(out["v"].iloc[:5].mean())

    def test_floored_days_counted(self):
        rows = [
            [100.0, 100.0, 97.0, 97.0],  # pure downward close, negative GK
            [97.0, 98.0, 96.0, 97.5],
        ]
        out = realized_range_series(make_ohlc(rows))
        assert (out["v"] >= 0).all()
        assert out.attrs["n_floored"] == int((out["v"] == 0).sum())

    @given(scale=st.floats(0.01, 100.0))
    def test_scale_invariance(self, scale):
        rows = [
            [100.0, 102.0, 99.0, 101.0],
            [101.5, 103.0, 100.5, 102.0],
        ]
        base = realized_range_series(make_ohlc(rows))
        scaled_rows = [[x * scale for x in r] for r in rows]
        scaled = realized_range_series(make_ohlc(scaled_rows))
        np.testing.assert_allclose(scaled["v"], base["v"], rtol=1e-9, atol=1e-12)

    def test_nonnegative_random_bars(self, rng):
        o = 100.0 * np.exp(rng.normal(0, 0.01, 50).cumsum())
        c = o * np.exp(rng.normal(0, 0.01, 50))
        hi = np.maximum(o, c) * np.exp(np.abs(rng.normal(0, 0.005, 50)))
        lo = np.minimum(o, c) * np.exp(-np.abs(rng.normal(0, 0.005, 50)))
        ohlc = make_ohlc(np.column_stack([o, hi, lo, c]).tolist())
        out = realized_range_series(ohlc)
        assert (out["v"] >= 0).all()


class TestLogVariance:
    def test_values_and_weekly_rebuilt(self):
        rows = [[100.0, 101.0 + 0.1 * i, 99.0, 100.0] for i in range(6)]
        vol = realized_range_series(make_ohlc(rows))
        logged = log_variance(vol, offset=1.0)
        np.testing.assert_allclose(logged["v"], np.log(1.0 + vol["v"]))
        assert logged["v_weekly"].iloc[4] == pytest.approx(
            logged["v"].iloc[:5].mean()
        )

    def test_nonpositive_argument_errors(self):
        vol = pd.DataFrame(
            {"v": [0.5]}, index=pd.DatetimeIndex(["2021-06-01"])
        )
        with pytest.raises(DataError, match="2021-06-01"):
            log_variance(vol, offset=-0.5)


class TestWeeklyComponent:
    def test_window_is_positional_not_calendar(self):
        # a gap over a holiday must not shrink the 5-observation window
        idx = pd.DatetimeIndex(
            ["2021-06-01", "2021-06-02", "2021-06-04", "2021-06-07",
             "2021-06-08", "2021-06-09"]
        )
        v = pd.Series([1.0, 2.0, 3.0, 4.0, 5.0, 6.0], index=idx)
        w = weekly_component(v)
        assert w.iloc[4] == pytest.approx(3.0)
        assert w.iloc[5] == pytest.approx(4.0)


class TestRangeVolatilityEstimator:
    def test_transform_plain(self):
        rows = [[100.0, 102.0, 99.0, 101.0]] * 6
        ohlc = make_ohlc(rows)
        out = RangeVolatilityEstimator().fit(ohlc).transform(ohlc)
        expected = realized_range_series(ohlc)
        pd.testing.assert_frame_equal(out, expected)

    def test_transform_log(self):
        rows = [[100.0, 102.0, 99.0, 101.0]] * 6
        ohlc = make_ohlc(rows)
        out = RangeVolatilityEstimator(log_transform=True, log_offset=2.0).transform(ohlc)
        expected = log_variance(realized_range_series(ohlc), offset=2.0)
        pd.testing.assert_frame_equal(out, expected)

    def test_get_params(self):
        est = RangeVolatilityEstimator(log_transform=True, log_offset=0.5)
        assert est.get_params() == {"log_transform": True, "log_offset": 0.5}
